"""Collision operators evaluated on test functions at a single velocity.

Three operators share one quadrature skeleton:

  apply_linearized_boltzmann   impact-parameter form of the operator
                               linearized around the Maxwellian, coupling
                               epsilon with a compact potential,
  apply_noncutoff_boltzmann    the same structure with the homogeneous
                               power law r^(-s), s > 1, truncated at a
                               large impact parameter with an analytic
                               tail bound,
  apply_linearized_landau      the diffusion operator the grazing limit
                               approaches, in the form that needs only
                               the gradient and Hessian of the test
                               function.

The skeleton: spherical shells around v1 for the Maxwellian v2-integral
(the shell Jacobian cancels the |v1-v2|^(-2) singularity of the Landau
kernel and keeps |v1-v2| constant per shell, so the deflection curve is a
single (shell x rho) batch), a fixed graded impact-parameter layout, and
a uniform circle rule for the azimuth.  Everything is evaluated serially
in a fixed order, so results are bit-reproducible.

Error estimates come from re-running on a coarsened node set, plus a
floor proportional to the gross (absolute-value) integral that accounts
for rounding in cancellative integrands such as collision invariants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from .quad import (
    DEFAULT_SPEC,
    circle_rule,
    gauss_panel,
    gaussian_truncation_radius,
    impact_layout,
    maxwellian_weight,
    sphere_rule,
)
from .scattering import theta_batch

_ROUNDOFF_FLOOR = 1e-13


# ---------------------------------------------------------------------------
# Test functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TestFunction:
    """Scalar function of velocity with analytic gradient and Hessian.

    Evaluators are vectorized: value maps (N,3) -> (N,), gradient ->
    (N,3), hessian -> (N,3,3).  c3_bound bounds the function and its
    first three derivatives; is_invariant marks collision invariants
    (linear combinations of 1, v, |v|^2).
    """

    name: str
    value: callable
    gradient: callable
    hessian: callable
    c3_bound: float
    is_invariant: bool = False


def constant_function(c=1.0):
    return TestFunction(
        name="one",
        value=lambda v: np.full(v.shape[:-1], c),
        gradient=lambda v: np.zeros(v.shape),
        hessian=lambda v: np.zeros(v.shape[:-1] + (3, 3)),
        c3_bound=abs(c),
        is_invariant=True,
    )


def coordinate_function(i):
    if i not in (0, 1, 2):
        raise ValueError("coordinate index must be 0, 1 or 2")
    e = np.zeros(3)
    e[i] = 1.0

    def hess(v):
        return np.zeros(v.shape[:-1] + (3, 3))

    return TestFunction(
        name=f"v{'xyz'[i]}",
        value=lambda v: v[..., i],
        gradient=lambda v: np.broadcast_to(e, v.shape).copy(),
        hessian=hess,
        c3_bound=1.0,
        is_invariant=True,
    )


def speed_squared_function():
    def hess(v):
        out = np.zeros(v.shape[:-1] + (3, 3))
        out[...] = 2.0 * np.eye(3)
        return out

    return TestFunction(
        name="speed2",
        value=lambda v: np.sum(v * v, axis=-1),
        gradient=lambda v: 2.0 * v,
        hessian=hess,
        c3_bound=2.0,
        is_invariant=True,
    )


def gaussian_function(a=1.0, center=(0.0, 0.0, 0.0), name=None):
    """psi(v) = exp(-a |v - v0|^2)."""
    if a <= 0.0:
        raise ValueError("gaussian width parameter must be positive")
    v0 = np.asarray(center, dtype=float)

    def value(v):
        d = v - v0
        return np.exp(-a * np.sum(d * d, axis=-1))

    def gradient(v):
        d = v - v0
        return -2.0 * a * d * value(v)[..., None]

    def hessian(v):
        d = v - v0
        outer = d[..., :, None] * d[..., None, :]
        core = 4.0 * a * a * outer - 2.0 * a * np.eye(3)
        return core * value(v)[..., None, None]

    bound = max(1.0, 2.0 * a, (2.0 * a) ** 1.5)
    return TestFunction(
        name=name or "gaussian",
        value=value,
        gradient=gradient,
        hessian=hessian,
        c3_bound=bound,
    )


def sine_function(wavevector=(1.0, 0.5, -0.25), name=None):
    """psi(v) = sin(k . v)."""
    k = np.asarray(wavevector, dtype=float)

    def value(v):
        return np.sin(v @ k)

    def gradient(v):
        return np.cos(v @ k)[..., None] * k

    def hessian(v):
        return -np.sin(v @ k)[..., None, None] * np.outer(k, k)

    kn = float(np.linalg.norm(k))
    return TestFunction(
        name=name or "sine",
        value=value,
        gradient=gradient,
        hessian=hessian,
        c3_bound=max(1.0, kn**3),
    )


_REGISTRY = {
    "one": constant_function,
    "vx": lambda: coordinate_function(0),
    "vy": lambda: coordinate_function(1),
    "vz": lambda: coordinate_function(2),
    "speed2": speed_squared_function,
    "gaussian": gaussian_function,
    "gaussian_wide": lambda: gaussian_function(0.5, name="gaussian_wide"),
    "gaussian_shifted": lambda: gaussian_function(
        1.0, center=(1.0, 0.0, 0.0), name="gaussian_shifted"
    ),
    "sine": sine_function,
    "sine_fast": lambda: sine_function((2.0, -1.0, 0.5), name="sine_fast"),
}


def get_test_function(name):
    """Look up a shipped test function by name."""
    try:
        return _REGISTRY[name]()
    except KeyError:
        raise ValueError(
            f"unknown test function {name!r}; available: {sorted(_REGISTRY)}"
        ) from None


def test_function_names():
    return sorted(_REGISTRY)


# ---------------------------------------------------------------------------
# Shared geometry
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OperatorValue:
    value: float
    error_estimate: float
    breakdown: dict = field(default_factory=dict)


def _frames(eta):
    """Orthonormal (a, b) completing each row of eta, vectorized."""
    n = eta.shape[0]
    ref = np.zeros_like(eta)
    ref[np.arange(n), np.argmin(np.abs(eta), axis=1)] = 1.0
    a = ref - np.sum(ref * eta, axis=1, keepdims=True) * eta
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b = np.cross(eta, a)
    return a, b


@lru_cache(maxsize=64)
def _theta_grid(p, coupling, rho_scale, radial_nodes, abs_tol):
    """Deflection on the (shell radius x impact parameter) grid, cached.

    The grid depends only on the potential, the coupling and the node
    layout, never on the test function or the evaluation point, so a
    sweep over many psi and v1 pays for it once.
    """
    radius = gaussian_truncation_radius(abs_tol)
    r, _ = gauss_panel(0.0, radius, radial_nodes)
    rho, _ = impact_layout(rho_scale)
    kappa = 2.0 * coupling / r**2
    return theta_batch(p, rho[None, :], kappa[:, None])  # (n_r, n_rho)


def _collision_sum(psi, v1, p, rho_scale, coupling, spec):
    """Core triple quadrature; returns (near, far, gross).

    near/far split the v2-integral at |v1 - v2| = 1.  gross accumulates
    the magnitude of the summands at the same nodes, setting the scale
    for the rounding floor of the error estimate.
    """
    v1 = np.asarray(v1, dtype=float)
    radius = gaussian_truncation_radius(spec.abs_tol)
    r, wr = gauss_panel(0.0, radius, spec.radial_nodes)
    dirs, wd = sphere_rule(spec.sphere_nodes)
    rho, wrho = impact_layout(rho_scale)
    az, waz = circle_rule(spec.circle_nodes)

    theta = _theta_grid(p, coupling, rho_scale, spec.radial_nodes, spec.abs_tol)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)

    eta = -dirs  # eta = (v1 - v2)/|v1 - v2| with v2 = v1 + r*d
    fa, fb = _frames(eta)
    rho_w = wrho * rho
    rho_w_total = float(np.sum(rho_w))
    psi1 = float(psi.value(v1[None, :])[0])

    near = 0.0
    far = 0.0
    gross = 0.0
    for i in range(r.size):
        ri = r[i]
        v2 = v1[None, :] + ri * dirs
        mwd = wd * maxwellian_weight(v2)
        shell_w = wr[i] * ri * ri * ri  # r^2 Jacobian times the rate |v1-v2|
        psi2 = psi.value(v2)
        jump = ri * 0.5 * (cos_t[i] - 1.0)  # along eta
        perp = ri * 0.5 * sin_t[i]  # along eta_perp
        shell_val = 0.0
        for j in range(az.size):
            eperp = math.cos(az[j]) * fa + math.sin(az[j]) * fb
            vhat = (
                jump[None, :, None] * eta[:, None, :]
                + perp[None, :, None] * eperp[:, None, :]
            )
            p1 = psi.value(v1[None, None, :] + vhat)
            p2 = psi.value(v2[:, None, :] - vhat)
            dpsi = (p1 - psi1) + (p2 - psi2[:, None])
            shell_val += waz[j] * float(mwd @ (dpsi @ rho_w))
        if ri <= 1.0:
            near += shell_w * shell_val
        else:
            far += shell_w * shell_val
        # scale of the summands (outgoing values have the same magnitude
        # as the incoming ones, so the incoming pair sets the scale)
        gross += (
            shell_w
            * 2.0
            * math.pi
            * rho_w_total
            * 2.0
            * float(mwd @ (np.abs(psi2) + abs(psi1)))
        )
    return near, far, gross


def apply_linearized_boltzmann(psi, v1, epsilon, p, spec=DEFAULT_SPEC):
    """Linearized collision operator at v1 in the impact-parameter form.

    Value of int int int (psi(v1') + psi(v2') - psi(v1) - psi(v2))
    rho M(v2) |v1 - v2| drho d(eta_perp) dv2 with the deflection computed
    from the coupling epsilon * phi.
    """
    if epsilon < 0.0:
        raise ValueError("coupling epsilon must be >= 0")
    if not p.compact:
        raise ValueError(
            "impact-parameter integral over (0, support) needs a compact "
            "potential; use apply_noncutoff_boltzmann for power laws"
        )
    if epsilon == 0.0:
        return OperatorValue(0.0, 0.0, {"near_field": 0.0, "far_field": 0.0})

    near, far, gross = _collision_sum(psi, v1, p, p.support_radius, epsilon, spec)
    n2, f2, _ = _collision_sum(
        psi, v1, p, p.support_radius, epsilon, spec.scaled(0.6)
    )
    value = near + far
    err = abs(value - (n2 + f2)) + _ROUNDOFF_FLOOR * gross
    return OperatorValue(
        value, err, {"near_field": near, "far_field": far, "gross": gross}
    )


def apply_noncutoff_boltzmann(psi, v1, p_hom, rho_max, spec=DEFAULT_SPEC):
    """Boltzmann operator for the homogeneous power law, truncated in rho.

    Impact parameters run over (0, rho_max] with unit coupling.  The
    neglected tail is bounded using the small-angle asymptote
    theta ~ 2 f0 s J_s / (|v1-v2|^2 rho^s) and quadratic cancellation of
    the integrand, and reported inside error_estimate.
    """
    if p_hom.kind != "pure_power" or p_hom.s <= 1.0:
        raise ValueError("requires the homogeneous power law with s > 1")
    if rho_max < 10.0:
        raise ValueError("rho_max must be at least 10")

    near, far, gross = _collision_sum(psi, v1, p_hom, rho_max, 1.0, spec)
    n2, f2, _ = _collision_sum(psi, v1, p_hom, rho_max, 1.0, spec.scaled(0.6))
    value = near + far

    s = p_hom.s
    j_s = math.sqrt(math.pi) * math.gamma(0.5 * (s + 1.0)) / (
        2.0 * math.gamma(0.5 * s + 1.0)
    )
    born_const = s * p_hom.f0 * j_s
    # |circle-averaged jump| <= c3 * w^2 theta^2 / 4, rate w, theta ~ kappa-law
    inv_w = _maxwellian_inverse_speed(v1, spec)
    tail = (
        2.0
        * math.pi
        * psi.c3_bound
        * born_const**2
        * rho_max ** (2.0 - 2.0 * s)
        / (2.0 * s - 2.0)
        * inv_w
    )
    err = abs(value - (n2 + f2)) + tail + _ROUNDOFF_FLOOR * gross
    return OperatorValue(
        value,
        err,
        {"near_field": near, "far_field": far, "tail_bound": tail, "gross": gross},
    )


def _maxwellian_inverse_speed(v1, spec):
    """int M(v2) / |v1 - v2| dv2 on the operator's shell nodes."""
    v1 = np.asarray(v1, dtype=float)
    radius = gaussian_truncation_radius(spec.abs_tol)
    r, wr = gauss_panel(0.0, radius, spec.radial_nodes)
    dirs, wd = sphere_rule(spec.sphere_nodes)
    total = 0.0
    for i in range(r.size):
        v2 = v1[None, :] + r[i] * dirs
        total += wr[i] * r[i] * float(wd @ maxwellian_weight(v2))
    return total


def apply_linearized_landau(psi, v1, spec=DEFAULT_SPEC):
    """The grazing-limit diffusion operator at v1.

    Evaluates int [ 4 eta.(grad psi(v2) - grad psi(v1)) / |v1-v2|^2
    + Pperp(eta) : (hess psi(v1) + hess psi(v2)) / |v1-v2| ] M(v2) dv2
    on shells around v1 (the shell Jacobian cancels the w^-2 factor).
    """

    def run(sp):
        v = np.asarray(v1, dtype=float)
        radius = gaussian_truncation_radius(sp.abs_tol)
        r, wr = gauss_panel(0.0, radius, sp.radial_nodes)
        dirs, wd = sphere_rule(sp.sphere_nodes)
        g1 = psi.gradient(v[None, :])[0]
        h1 = psi.hessian(v[None, :])[0]
        tr_h1 = np.trace(h1)
        total = 0.0
        gross = 0.0
        for i in range(r.size):
            ri = r[i]
            v2 = v[None, :] + ri * dirs
            m = maxwellian_weight(v2)
            eta = -dirs
            dg = psi.gradient(v2) - g1[None, :]
            h2 = psi.hessian(v2)
            # Pperp(eta) : H = trace(H) - eta.H.eta
            tr = tr_h1 + np.trace(h2, axis1=1, axis2=2)
            quad = np.einsum("ni,nij,nj->n", eta, h2, eta) + np.einsum(
                "ni,ij,nj->n", eta, h1, eta
            )
            drift = 4.0 * np.sum(eta * dg, axis=1)
            term = drift / (ri * ri) + (tr - quad) / ri
            total += wr[i] * ri * ri * float(wd @ (m * term))
            gross += wr[i] * ri * ri * float(
                wd @ (m * (np.abs(drift) / (ri * ri) + (np.abs(tr) + np.abs(quad)) / ri))
            )
        return total, gross

    value, gross = run(spec)
    coarse, _ = run(spec.scaled(0.6))
    err = abs(value - coarse) + _ROUNDOFF_FLOOR * gross
    return OperatorValue(float(value), float(err), {"gross": float(gross)})


# ---------------------------------------------------------------------------
# Quadratic form (Monte Carlo)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QuadraticFormEstimate:
    value: float
    std_error: float
    n_samples: int


def quadratic_form(psi, epsilon, p, spec=DEFAULT_SPEC):
    """Seeded MC estimate of the Dirichlet form (L_eps psi, psi) in L^2(M).

    Uses the symmetrized representation -(1/4) E[(psi1' + psi2' - psi1 -
    psi2)^2 * |v1-v2| * pi S^2] over v1, v2 ~ M, rho^2 uniform on (0, S^2),
    azimuth uniform; every sample is nonpositive, so the estimate is
    manifestly <= 0 up to nothing at all.
    """
    if epsilon <= 0.0:
        raise ValueError("quadratic_form requires epsilon > 0")
    if not p.compact:
        raise ValueError("quadratic_form needs a compact potential")
    rng = spec.rng()
    n = spec.mc_samples
    sup = p.support_radius

    v1 = rng.standard_normal((n, 3))
    v2 = rng.standard_normal((n, 3))
    rho = sup * np.sqrt(rng.random(n))
    az = 2.0 * math.pi * rng.random(n)

    diff = v1 - v2
    w = np.linalg.norm(diff, axis=1)
    w = np.maximum(w, 1e-12)
    eta = diff / w[:, None]
    kappa = 2.0 * epsilon / w**2
    theta = theta_batch(p, rho, kappa)

    fa, fb = _frames(eta)
    eperp = np.cos(az)[:, None] * fa + np.sin(az)[:, None] * fb
    half = 0.5 * w
    vhat = (
        half * (np.cos(theta) - 1.0)
    )[:, None] * eta + (half * np.sin(theta))[:, None] * eperp

    dpsi = (
        psi.value(v1 + vhat)
        + psi.value(v2 - vhat)
        - psi.value(v1)
        - psi.value(v2)
    )
    samples = -0.25 * dpsi**2 * w * math.pi * sup**2
    value = float(np.mean(samples))
    stderr = float(np.std(samples, ddof=1) / math.sqrt(n))
    return QuadraticFormEstimate(value, stderr, n)
