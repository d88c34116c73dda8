"""Radial interaction potentials phi(r) = f(r) / r**s and derived quantities.

Three families are shipped:

  poly_bump    f(r) = f0 * (1 - r^2)^q on (0, 1], zero outside.  The default
               admissible potential: decreasing, compactly supported,
               f(1) = 0, with closed-form derivatives.
  pure_power   f == f0 on all of (0, inf).  Non-compact idealization that
               admits closed-form oracles (Coulomb minimal distance, Born
               angle 2*kappa*f0/rho); gated behind its own kind because it
               violates the compact-support assumption.
  scaled_bump  f(eps * r) / r^s with the poly bump regular part, support
               radius 1/eps.  Used when comparing against the homogeneous
               power law in the hard-potential (s > 1) studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .quad import DEFAULT_SPEC, gauss_panel, integrate_1d

_KINDS = ("poly_bump", "pure_power", "scaled_bump")


@dataclass(frozen=True)
class Potential:
    s: float
    kind: str = "poly_bump"
    f0: float = 1.0
    q: int = 2
    eps_scale: float = 0.0

    def __post_init__(self):
        if self.s < 0.0:
            raise ValueError("singularity order s must be >= 0")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.f0 <= 0.0:
            raise ValueError("amplitude f0 must be positive")
        if self.kind != "pure_power" and self.q < 2:
            raise ValueError("bump exponent q must be >= 2")
        if self.kind == "scaled_bump" and not self.eps_scale > 0.0:
            raise ValueError("scaled_bump requires eps_scale > 0")

    # -- constructors -------------------------------------------------------

    @classmethod
    def poly_bump(cls, s, f0=1.0, q=2):
        return cls(s=s, kind="poly_bump", f0=f0, q=q)

    @classmethod
    def pure_power(cls, s, f0=1.0):
        return cls(s=s, kind="pure_power", f0=f0)

    @classmethod
    def scaled_bump(cls, s, eps_scale, f0=1.0, q=2):
        return cls(s=s, kind="scaled_bump", f0=f0, q=q, eps_scale=eps_scale)

    # -- structure ----------------------------------------------------------

    @property
    def support_radius(self):
        if self.kind == "poly_bump":
            return 1.0
        if self.kind == "scaled_bump":
            return 1.0 / self.eps_scale
        return math.inf

    @property
    def compact(self):
        return math.isfinite(self.support_radius)

    @property
    def f_at_zero(self):
        return self.f0

    # -- regular part f and its r-derivatives -------------------------------

    def _bump_arg(self, r):
        if self.kind == "scaled_bump":
            return self.eps_scale * r, self.eps_scale
        return r, 1.0

    def _f(self, r):
        if self.kind == "pure_power":
            return np.full_like(np.asarray(r, dtype=float), self.f0)
        x, _ = self._bump_arg(r)
        return self.f0 * (1.0 - x * x) ** self.q

    def _f1(self, r):
        if self.kind == "pure_power":
            return np.zeros_like(np.asarray(r, dtype=float))
        x, c = self._bump_arg(r)
        return c * (-2.0 * self.q * self.f0) * x * (1.0 - x * x) ** (self.q - 1)

    def _f2(self, r):
        if self.kind == "pure_power":
            return np.zeros_like(np.asarray(r, dtype=float))
        x, c = self._bump_arg(r)
        one = 1.0 - x * x
        val = one ** (self.q - 1) - 2.0 * (self.q - 1) * x * x * one ** (self.q - 2)
        return c * c * (-2.0 * self.q * self.f0) * val


# ---------------------------------------------------------------------------
# Evaluation (vectorized internals allow any r > 0 and zero-fill outside
# the support; the public operations enforce the documented domains).
# ---------------------------------------------------------------------------


def phi_on_support(p, r):
    """phi(r) for array r, zero outside the support.  No domain checks."""
    r = np.asarray(r, dtype=float)
    inside = r <= p.support_radius
    safe = np.where(inside, r, 1.0)
    val = p._f(safe) * safe ** (-p.s)
    return np.where(inside, val, 0.0)


def phi_derivs_on_support(p, r):
    """(phi', phi'') for array r, zero outside the support."""
    r = np.asarray(r, dtype=float)
    inside = r <= p.support_radius
    safe = np.where(inside, r, 1.0)
    f, f1, f2 = p._f(safe), p._f1(safe), p._f2(safe)
    s = p.s
    rs = safe ** (-s)
    d1 = f1 * rs - s * f * rs / safe
    d2 = f2 * rs - 2.0 * s * f1 * rs / safe + s * (s + 1.0) * f * rs / safe**2
    return np.where(inside, d1, 0.0), np.where(inside, d2, 0.0)


def eval_phi(p, r):
    """phi(r) = f(r)/r^s inside the support, exactly 0 beyond it."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("eval_phi requires r > 0")
    out = phi_on_support(p, arr)
    return float(out) if np.isscalar(r) or arr.ndim == 0 else out


def eval_phi_derivatives(p, r):
    """(phi'(r), phi''(r)) strictly inside the support."""
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0.0) or np.any(arr >= p.support_radius):
        raise ValueError(
            f"derivatives defined on (0, {p.support_radius}); got r={r!r}"
        )
    d1, d2 = phi_derivs_on_support(p, arr)
    if np.isscalar(r) or arr.ndim == 0:
        return float(d1), float(d2)
    return d1, d2


def envelope_k(p, rho):
    """sup over r in (rho, 1) of {|phi|, r|phi'|, r^2|phi''|}.

    Computed on a dense grid with a local refinement pass around the grid
    maximum.  At rho = 1 the empty interval degenerates to the left limit,
    i.e. the three expressions evaluated at r = 1.
    """
    if not 0.0 < rho <= 1.0:
        raise ValueError("envelope_k requires rho in (0, 1]")

    def candidates(r):
        r = np.asarray(r, dtype=float)
        val = np.abs(phi_on_support(p, r))
        d1, d2 = phi_derivs_on_support(p, r)
        return np.maximum(val, np.maximum(r * np.abs(d1), r * r * np.abs(d2)))

    if rho >= 1.0:
        return float(candidates(np.array([1.0]))[0])

    grid = np.unique(
        np.concatenate([np.geomspace(rho, 1.0, 1025), np.linspace(rho, 1.0, 1025)])
    )
    vals = candidates(grid)
    i = int(np.argmax(vals))
    best = float(vals[i])
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, len(grid) - 1)]
    if hi > lo:
        res = minimize_scalar(
            lambda r: -float(candidates(np.array([r]))[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best


# ---------------------------------------------------------------------------
# Radial Fourier transform
# ---------------------------------------------------------------------------


def _fourier_upper_limit(p):
    # Non-compact potentials are truncated to the unit ball ("truncated
    # Coulomb" convention); the transform does not converge otherwise.
    return min(p.support_radius, 1.0) if not p.compact else p.support_radius


def _radial_sin_integral(p, k, spec):
    """J(k) = integral of r * phi(r) * sin(k r) over the support."""
    upper = _fourier_upper_limit(p)

    def integrand(r):
        return r * phi_on_support(p, r) * np.sin(k * r)

    # integrand ~ r^(1-s) at 0: regularize for s > 0, and split the
    # remaining range into panels no wider than the oscillation scale.
    first_edge = min(upper, math.pi / k) if k > math.pi / upper else upper
    sing = ("power_left", p.s - 1.0) if p.s > 0.0 else None
    total, err = integrate_1d(integrand, 0.0, first_edge, sing, spec)
    edge = first_edge
    while edge < upper:
        nxt = min(upper, edge + math.pi / k)
        v, e = integrate_1d(integrand, edge, nxt, None, spec)
        total += v
        err += e
        edge = nxt
    return total, err


def fourier_transform(p, k, spec=DEFAULT_SPEC):
    """hat(Phi)(k) = (4 pi / k) * J(k) with the e^{-ik.x} convention.

    Defined for s < 2 (integrability of r*phi at the origin).  Small k uses
    the series branch hat(Phi)(k) -> 4 pi * int r^2 phi dr.
    """
    if p.s >= 2.0:
        raise ValueError("radial Fourier transform requires s < 2")
    if not k > 0.0:
        raise ValueError("fourier_transform requires k > 0")
    upper = _fourier_upper_limit(p)
    if k * upper < 1e-4:
        # sin(kr)/k = r - k^2 r^3 / 6 + O(k^4)
        sing = ("power_left", p.s - 1.0) if p.s > 0.0 else None
        m2, _ = integrate_1d(
            lambda r: r * r * phi_on_support(p, r), 0.0, upper, sing, spec
        )
        m4, _ = integrate_1d(
            lambda r: r**4 * phi_on_support(p, r), 0.0, upper, sing, spec
        )
        return 4.0 * math.pi * (m2 - k * k * m4 / 6.0)
    val, _ = _radial_sin_integral(p, k, spec)
    return 4.0 * math.pi * val / k


def fourier_transform_fixed(p, k, nodes_per_panel=12):
    """Fixed-rule hat(Phi)(k) for k > 0, one vectorized pass.

    Oscillation-aware panels of width <= pi/k; the panel touching the origin
    is mapped through r = t^(1/(2-s)) so the r^(1-s) factor is exact.  Used
    inside k-integrals where integrate_1d per node would dominate the cost.
    """
    if p.s >= 2.0:
        raise ValueError("radial Fourier transform requires s < 2")
    upper = _fourier_upper_limit(p)
    n_panels = max(1, int(math.ceil(k * upper / math.pi)))
    edges = np.linspace(0.0, upper, n_panels + 1)

    total = 0.0
    # singular panel via substitution
    m = 2.0 - p.s
    t_hi = edges[1] ** (1.0 / m) if m != 0 else edges[1]
    t, wt = gauss_panel(0.0, t_hi, nodes_per_panel)
    r = t**m
    total += float(np.dot(wt, r * phi_on_support(p, r) * np.sin(k * r) * m * r / t))
    if n_panels > 1:
        r, wr = np.concatenate(
            [gauss_panel(edges[i], edges[i + 1], nodes_per_panel)[0] for i in range(1, n_panels)]
        ), np.concatenate(
            [gauss_panel(edges[i], edges[i + 1], nodes_per_panel)[1] for i in range(1, n_panels)]
        )
        total += float(np.dot(wr, r * phi_on_support(p, r) * np.sin(k * r)))
    return 4.0 * math.pi * total / k
