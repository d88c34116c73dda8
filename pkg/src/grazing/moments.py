"""Angular moments of the collision kernel reduced to 1D rho-integrals.

With the impact vector written as (rho, eta_perp), the hemisphere moments of
the velocity jump v_hat = (|v1-v2|/2)((cos(theta)-1) eta + sin(theta) eta_perp)
against the rate factor (v1-v2).nu reduce via the circle identities

    int eta_perp d(eta_perp) = 0,
    int eta_perp (x) eta_perp d(eta_perp) = pi * Pperp(eta)

to weighted integrals of sin(theta(rho)/2) powers over the impact parameter.
The deflection curve rho -> theta(rho; kappa) is the expensive part, so it
is computed once per (potential, kappa, resolution) on a fixed graded layout
and cached.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .potential import Potential
from .quad import DEFAULT_SPEC, QuadSpec, impact_layout
from .scattering import theta_batch

_MOMENT_NODES_PER_PANEL = 12


@lru_cache(maxsize=256)
def _theta_curve_cached(p, kappa, nodes_per_panel):
    rho, wts = impact_layout(p.support_radius, nodes_per_panel=nodes_per_panel)
    theta = theta_batch(p, rho, np.full_like(rho, kappa))
    return rho, wts, theta


def theta_curve(p, kappa, nodes_per_panel=_MOMENT_NODES_PER_PANEL):
    """(rho nodes, weights, theta values) for a compact potential at kappa.

    The layout is graded geometrically toward rho = 0, so the backscatter
    transition near rho ~ kappa^(1/s) stays resolved down to kappa ~ 1e-15.
    """
    if not p.compact:
        raise ValueError("moment integrals need a compactly supported potential")
    if kappa < 0.0:
        raise ValueError("kappa must be >= 0")
    return _theta_curve_cached(p, float(kappa), nodes_per_panel)


def _rho_integral(p, kappa, fn):
    rho, wts, theta = theta_curve(p, kappa)
    return float(np.dot(wts * rho, fn(theta)))


def sin2_moment(p, kappa, spec=DEFAULT_SPEC):
    """int_0^1 sin^2(theta(rho)/2) rho drho."""
    if kappa == 0.0:
        return 0.0
    return _rho_integral(p, kappa, lambda t: np.sin(0.5 * t) ** 2)


def cube_moment(p, kappa, spec=DEFAULT_SPEC):
    """int_0^1 |theta(rho)|^3 rho drho."""
    if kappa == 0.0:
        return 0.0
    return _rho_integral(p, kappa, lambda t: np.abs(t) ** 3)


def sin4_moment(p, kappa, spec=DEFAULT_SPEC):
    """int_0^1 sin^4(theta/2) rho drho (eta-eta entry of the second moment)."""
    if kappa == 0.0:
        return 0.0
    return _rho_integral(p, kappa, lambda t: np.sin(0.5 * t) ** 4)


def sin2cos2_moment(p, kappa, spec=DEFAULT_SPEC):
    """int_0^1 sin^2(theta/2) cos^2(theta/2) rho drho (transverse entry)."""
    if kappa == 0.0:
        return 0.0
    return _rho_integral(
        p, kappa, lambda t: (np.sin(0.5 * t) * np.cos(0.5 * t)) ** 2
    )


def abs_sin3_moment(p, kappa, spec=DEFAULT_SPEC):
    """int_0^1 |sin(theta/2)|^3 rho drho (third absolute moment reduction)."""
    if kappa == 0.0:
        return 0.0
    return _rho_integral(p, kappa, lambda t: np.abs(np.sin(0.5 * t)) ** 3)


@dataclass(frozen=True)
class MomentSet:
    """Hemisphere moments of v_hat weighted by the rate (v1-v2).nu."""

    first: np.ndarray  # int v_hat (v1-v2).nu dnu
    second: np.ndarray  # int v_hat (x) v_hat (v1-v2).nu dnu
    third_abs: float  # int |v_hat|^3 (v1-v2).nu dnu
    kappa: float
    v_rel: float


def vhat_moments(v1, v2, epsilon, p, spec=DEFAULT_SPEC):
    """First, second and third absolute moments of the velocity jump.

    first  = -2 pi w^2 S2 eta
    second = w^3 [2 pi S4 eta(x)eta + pi S22 Pperp(eta)]
    third  = 2 pi w^4 S3abs
    with w = |v1-v2| and S* the sin(theta/2)-power rho-integrals above.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    diff = v1 - v2
    w = float(np.linalg.norm(diff))
    if w == 0.0:
        raise ValueError("vhat_moments requires v1 != v2")
    eta = diff / w
    if epsilon == 0.0:
        return MomentSet(np.zeros(3), np.zeros((3, 3)), 0.0, 0.0, w)
    kappa = 2.0 * epsilon / w**2

    s2 = sin2_moment(p, kappa, spec)
    s4 = sin4_moment(p, kappa, spec)
    s22 = sin2cos2_moment(p, kappa, spec)
    s3 = abs_sin3_moment(p, kappa, spec)

    outer = np.outer(eta, eta)
    pperp = np.eye(3) - outer
    first = -2.0 * np.pi * w**2 * s2 * eta
    second = w**3 * (2.0 * np.pi * s4 * outer + np.pi * s22 * pperp)
    third = 2.0 * np.pi * w**4 * s3
    return MomentSet(first, second, third, kappa, w)
