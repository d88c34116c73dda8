"""Two-body scattering: minimal distance, deflection angle, collision rule.

The deflection angle follows the classical radial-quadrature representation

    theta = pi - 2 * int_{r_min}^{inf} rho / (r^2 sqrt(F(r))) dr,
    F(r)  = 1 - rho^2/r^2 - 2*kappa*phi(r),      kappa = 2*eps/|v1-v2|^2.

Internally the integral is taken in the inverted coordinate w = 1/r, which
turns the infinite range into (0, 1/r_min] and makes the free-flight part
outside the support an exact arcsin.  The square-root turning-point
singularity at w = 1/r_min is removed by the substitution w = w_max - t^2,
after which the integrand is analytic and Gauss panels converge spectrally.

An adaptive scalar path (`deflection_angle`) and a vectorized fixed-rule
path (`theta_batch`, used by the collision-operator quadratures) share the
same geometry; an independent trajectory ODE (`deflection_angle_ode`)
serves as cross-method oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .potential import Potential, phi_derivs_on_support, phi_on_support
from .quad import (
    DEFAULT_SPEC,
    bisect_monotone_array,
    find_root_increasing,
    gauss_panel,
    integrate_1d,
)

_TINY = 1e-300


# ---------------------------------------------------------------------------
# Geometry containers
# ---------------------------------------------------------------------------


def orthonormal_frame(eta):
    """Two unit vectors completing eta to a right-handed frame."""
    eta = np.asarray(eta, dtype=float)
    ref = np.zeros(3)
    ref[int(np.argmin(np.abs(eta)))] = 1.0
    a = ref - np.dot(ref, eta) * eta
    a /= np.linalg.norm(a)
    b = np.cross(eta, a)
    return a, b


@dataclass(frozen=True)
class CollisionGeometry:
    """Incoming pair plus impact parameter, azimuth and coupling strength."""

    v1: np.ndarray
    v2: np.ndarray
    rho: float
    azimuth: float = 0.0
    epsilon: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "v1", np.asarray(self.v1, dtype=float))
        object.__setattr__(self, "v2", np.asarray(self.v2, dtype=float))
        if np.allclose(self.v1, self.v2):
            raise ValueError("collision geometry requires v1 != v2")
        if self.rho < 0.0:
            raise ValueError("impact parameter must be >= 0")
        if self.epsilon < 0.0:
            raise ValueError("coupling epsilon must be >= 0")

    @property
    def v_rel(self):
        return self.v1 - self.v2

    @property
    def v_rel_mag(self):
        return float(np.linalg.norm(self.v_rel))

    @property
    def eta(self):
        return self.v_rel / self.v_rel_mag

    @property
    def eta_perp(self):
        a, b = orthonormal_frame(self.eta)
        return math.cos(self.azimuth) * a + math.sin(self.azimuth) * b

    @property
    def kappa(self):
        return 2.0 * self.epsilon / self.v_rel_mag**2


@dataclass(frozen=True)
class CollisionOutcome:
    theta: float
    v1p: np.ndarray
    v2p: np.ndarray
    r_min: float = math.nan
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Minimal distance
# ---------------------------------------------------------------------------


def r_min(p, rho, kappa):
    """Unique root of F(r) = 1 - 2*kappa*phi(r) - rho^2/r^2.

    Returns rho whenever the potential vanishes on the relevant range
    (rho beyond the support, or kappa = 0).  For the head-on case rho = 0
    with a regular core (s = 0) and 2*kappa*f(0) < 1 there is no turning
    point and 0.0 is returned.
    """
    if rho == 0.0 and kappa == 0.0:
        raise ValueError("r_min undefined at (rho, kappa) = (0, 0)")
    if kappa == 0.0 or rho >= p.support_radius:
        return float(rho)

    def F(r):
        return 1.0 - 2.0 * kappa * float(phi_on_support(p, np.asarray(r))) - (rho / r) ** 2 if rho > 0.0 else 1.0 - 2.0 * kappa * float(phi_on_support(p, np.asarray(r)))

    if rho == 0.0:
        if p.s == 0.0 and 2.0 * kappa * p.f_at_zero < 1.0:
            return 0.0
        # singular core: descend until F < 0
        lo = min(1.0, p.support_radius) * 0.5
        while F(lo) >= 0.0:
            lo *= 0.5
            if lo < 1e-200:
                return 0.0
        hi = lo
    else:
        lo = rho
        if F(lo) >= 0.0:
            return float(rho)
        hi = rho

    if p.compact:
        hi = p.support_radius
    else:
        hi = max(hi, 1.0)
        while F(hi) <= 0.0:
            hi *= 2.0
    # machine-tight tolerance: the deflection integral sees a turning-point
    # error delta as a sqrt(delta) angle error
    return find_root_increasing(F, (lo, hi), tol=4e-16)


# ---------------------------------------------------------------------------
# Deflection angle: shared w-coordinate machinery
# ---------------------------------------------------------------------------


def _f_tilde(p, w, rho, kappa):
    """F(1/w) = 1 - (rho*w)^2 - 2*kappa*phi(1/w), elementwise."""
    r = 1.0 / np.maximum(w, _TINY)
    return 1.0 - (rho * w) ** 2 - 2.0 * kappa * phi_on_support(p, r)


def _w_lo(p):
    return 0.0 if not p.compact else 1.0 / p.support_radius


def _batch_panels(n_turn=24, n_per=6, n_octaves=52):
    """Reference nodes/weights on [0, 1] for the substituted angle integral.

    In the variable u = T - t (T the substituted turning-point coordinate)
    the turning region occupies u in [1/2, 1] and gets one high-order
    panel, while the far field compresses geometrically toward u = 0 and
    gets one low-order panel per octave.  Fractions of T, so the same
    reference set serves every (rho, kappa) elementwise.
    """
    nodes = [gauss_panel(0.5, 1.0, n_turn)]
    for j in range(1, n_octaves + 1):
        nodes.append(gauss_panel(2.0 ** (-j - 1), 2.0**-j, n_per))
    u = np.concatenate([x for x, _ in nodes])
    w = np.concatenate([w for _, w in nodes])
    return u, w


_BATCH_U, _BATCH_W = _batch_panels()


def theta_batch(p, rho, kappa):
    """Deflection angles for elementwise arrays rho > 0, kappa (fixed rule).

    kappa may vary per entry.  Entries with kappa = 0 or rho beyond the
    support come out exactly 0.  The fixed graded rule resolves both the
    turning point and the geometrically compressed far field, reaching
    ~1e-11 absolute over the shipped families.
    """
    rho = np.asarray(rho, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    rho, kappa = np.broadcast_arrays(rho, kappa)
    out = np.zeros(rho.shape)
    active = (kappa > 0.0) & (rho > 0.0) & (rho < p.support_radius)
    if p.kind == "pure_power" and p.s == 0.0:
        return out  # constant potential exerts no force
    if not np.any(active):
        return out

    ra = rho[active]
    ka = kappa[active]
    w_lo = _w_lo(p)

    # w_max = 1/r_min: F~ is decreasing in w with F~(1/rho) <= 0
    lo = np.full(ra.shape, w_lo)
    hi = 1.0 / ra
    w_max = bisect_monotone_array(
        lambda w: -_f_tilde(p, w, ra, ka), lo, hi, n_iter=100
    )

    span = np.maximum(w_max - w_lo, 0.0)
    big_t = np.sqrt(span)
    integral = np.zeros(ra.shape)
    for ur, wr in zip(_BATCH_U, _BATCH_W):
        u = big_t * ur
        t = big_t - u
        # w - w_lo = span - t^2 = u (2T - u), formed without cancellation
        w = w_lo + u * (2.0 * big_t - u)
        f = np.maximum(_f_tilde(p, w, ra, ka), _TINY)
        integral += (wr * big_t) * 2.0 * t * ra / np.sqrt(f)

    head = 2.0 * np.arcsin(np.clip(ra * w_lo, 0.0, 1.0))
    theta = np.pi - head - 2.0 * integral
    out[active] = np.clip(theta, 0.0, np.pi)
    return out


def deflection_angle(p, rho, kappa, spec=DEFAULT_SPEC):
    """Scalar deflection angle via adaptive quadrature in [0, pi]."""
    if rho < 0.0 or kappa < 0.0:
        raise ValueError("rho and kappa must be nonnegative")
    if kappa == 0.0 or rho >= p.support_radius:
        return 0.0
    if p.kind == "pure_power" and p.s == 0.0:
        return 0.0
    if rho == 0.0:
        if p.s > 0.0:
            return math.pi  # head-on backscatter off the singular core
        return math.pi if 2.0 * kappa * p.f_at_zero >= 1.0 else 0.0

    rm = r_min(p, rho, kappa)
    w_lo = _w_lo(p)
    w_max = 1.0 / rm
    span = w_max - w_lo
    if span <= 0.0:
        return 0.0

    def integrand(t):
        w = w_max - t * t
        f = np.maximum(_f_tilde(p, w, rho, kappa), _TINY)
        return 2.0 * t * rho / np.sqrt(f)

    val, _ = integrate_1d(integrand, 0.0, math.sqrt(span), None, spec)
    theta = math.pi - 2.0 * math.asin(min(rho * w_lo, 1.0)) - 2.0 * val
    return min(max(theta, 0.0), math.pi)


# ---------------------------------------------------------------------------
# Trajectory ODE oracle
# ---------------------------------------------------------------------------


def deflection_angle_ode(p, rho, kappa, ode_tol=1e-10, start_radius=None):
    """Deflection angle from the reduced relative-motion trajectory.

    Integrates xdd = -2*eps*grad(Phi)(x) from the sphere |x| = R inbound
    until it is crossed outbound.  For compact potentials R is the support
    radius so free flight outside is exact; for non-compact ones R defaults
    to 1e3 * max(1, rho) and the residual bending beyond R is added via the
    rectilinear (Born) tail, keeping the oracle independent of the
    turning-point quadrature.

    Returns (theta, diagnostics) with the energy drift recorded.
    """
    if not (rho > 0.0 and kappa > 0.0):
        raise ValueError("ODE oracle requires rho > 0 and kappa > 0")
    if p.compact:
        radius = p.support_radius
        if rho >= radius:
            return 0.0, {"energy_drift": 0.0, "n_steps": 0}
    else:
        radius = start_radius if start_radius is not None else 1e3 * max(1.0, rho)
        if rho >= radius:
            raise ValueError("start radius must exceed the impact parameter")

    w = 1.0  # relative speed; theta depends on (rho, kappa) only
    eps = 0.5 * kappa * w * w

    # state on the start sphere matching the true orbit: speed from energy
    # conservation, offset from angular momentum conservation (for compact
    # potentials phi(radius) = 0 and this is the free-flight state)
    phi_r = float(phi_on_support(p, np.asarray(radius)))
    speed = math.sqrt(w * w - 4.0 * eps * phi_r)
    offset = rho * w / speed
    if offset >= radius:
        raise ValueError("start radius too small for this impact parameter")

    def rhs(t, y):
        x = y[:3]
        r = np.linalg.norm(x)
        d1, _ = phi_derivs_on_support(p, np.asarray(r))
        acc = -2.0 * eps * float(d1) / r * x
        return np.concatenate([y[3:], acc])

    def escape(t, y):
        return y[0] ** 2 + y[1] ** 2 + y[2] ** 2 - radius**2

    escape.terminal = True
    escape.direction = 1.0

    x0 = np.array([-math.sqrt(radius**2 - offset**2), offset, 0.0])
    v0 = np.array([speed, 0.0, 0.0])
    sol = solve_ivp(
        rhs,
        (0.0, 100.0 * radius / speed),
        np.concatenate([x0, v0]),
        method="DOP853",
        rtol=ode_tol,
        atol=ode_tol,
        events=escape,
        dense_output=False,
    )
    if not sol.t_events[0].size:
        raise RuntimeError(
            f"trajectory did not leave |x| = {radius} "
            f"(closest state {sol.y[:3, -1]})"
        )
    y_end = sol.y_events[0][0]
    v_out = y_end[3:]

    def energy(y):
        r = np.linalg.norm(y[:3])
        return 0.5 * np.dot(y[3:], y[3:]) + 2.0 * eps * float(
            phi_on_support(p, np.asarray(r))
        )

    e0 = energy(np.concatenate([x0, v0]))
    drift = max(abs(energy(sol.y[:, i]) - e0) for i in range(sol.y.shape[1]))

    cosang = np.clip(
        np.dot(v_out, v0) / (np.linalg.norm(v_out) * speed), -1.0, 1.0
    )
    theta = math.acos(cosang)

    if not p.compact:
        theta += _born_tail(p, rho, kappa, radius)
    return theta, {"energy_drift": drift, "n_steps": sol.t.size}


def _born_tail(p, rho, kappa, radius, spec=DEFAULT_SPEC):
    """Rectilinear bending accumulated beyond |x| = radius (both legs)."""

    def g(u):
        r = rho / np.maximum(u, _TINY)
        d1, _ = phi_derivs_on_support(p, r)
        return r * d1 / np.sqrt(1.0 - u * u)

    val, _ = integrate_1d(g, 0.0, rho / radius, None, spec)
    return -2.0 * kappa * val


# ---------------------------------------------------------------------------
# Born approximation
# ---------------------------------------------------------------------------


def born_integral(p, rho, spec=DEFAULT_SPEC):
    """I(rho) = int_0^1 (rho/u) phi'(rho/u) du / sqrt(1-u^2).

    Also the rectilinear force line integral; shared by the Born angle and
    the Landau diffusion constant.
    """
    if rho <= 0.0:
        raise ValueError("born_integral requires rho > 0")
    u_lo = rho / p.support_radius if p.compact else 0.0
    if u_lo >= 1.0:
        return 0.0

    def g(u):
        r = rho / np.maximum(u, _TINY)
        d1, _ = phi_derivs_on_support(p, r)
        return r * d1

    def integrand(u):
        return g(u) / np.sqrt(np.maximum(1.0 - u * u, _TINY))

    val, _ = integrate_1d(integrand, u_lo, 1.0, "inverse_sqrt_right", spec)
    return val


@dataclass(frozen=True)
class BornAngle:
    value: float
    within_validity: bool


def born_validity_bound(p, rho):
    """Largest kappa for which the Born expansion bound is stated."""
    return rho**p.s / (4.0 * p.f_at_zero)


def born_angle(p, rho, kappa, spec=DEFAULT_SPEC):
    """Leading-order deflection -2*kappa*I(rho); positive for repulsion.

    Outside the validity region kappa < rho^s / (4 f(0)) the value is still
    computed and flagged.
    """
    if not 0.0 < rho:
        raise ValueError("born_angle requires rho > 0")
    within = kappa < born_validity_bound(p, rho)
    if rho >= p.support_radius:
        return BornAngle(0.0, within)
    return BornAngle(-2.0 * kappa * born_integral(p, rho, spec), within)


# ---------------------------------------------------------------------------
# Collision rule
# ---------------------------------------------------------------------------


def outgoing_velocities(geom, theta):
    """Post-collision velocities for a given deflection angle."""
    if not 0.0 <= theta <= math.pi + 1e-12:
        raise ValueError(f"theta must lie in [0, pi]; got {theta}")
    vc = 0.5 * (geom.v1 + geom.v2)
    half = 0.5 * geom.v_rel_mag
    d = half * (math.cos(theta) * geom.eta + math.sin(theta) * geom.eta_perp)
    return CollisionOutcome(theta=theta, v1p=vc + d, v2p=vc - d)


def scatter(p, geom, spec=DEFAULT_SPEC):
    """Full collision: solves the angle and applies the collision rule."""
    kappa = geom.kappa
    theta = deflection_angle(p, geom.rho, kappa, spec)
    outcome = outgoing_velocities(geom, theta)
    rm = r_min(p, geom.rho, kappa) if (geom.rho, kappa) != (0.0, 0.0) else 0.0
    return CollisionOutcome(
        theta=theta,
        v1p=outcome.v1p,
        v2p=outcome.v2p,
        r_min=rm,
        diagnostics={"kappa": kappa},
    )


# ---------------------------------------------------------------------------
# Homogeneous-vs-truncated angle comparison (s > 1 machinery)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AngleComparison:
    theta_eps: float
    theta_hom: float
    bound_envelope: float  # C = 1 envelope; studies fit the constant


def comparison_region_ok(s, eps, rho, v_rel_mag):
    """The (v2, rho) control region for the angle-comparison bound."""
    if not v_rel_mag > 3.0 * eps ** (s / 20.0):
        return False, f"|v1-v2| = {v_rel_mag} must exceed 3*eps^(s/20)"
    if not rho < 0.5 * eps ** (-0.1):
        return False, f"rho = {rho} must be below eps^(-1/10)/2"
    return True, ""


def angle_comparison(p_hom, eps, rho, v_rel_mag, spec=DEFAULT_SPEC, q=2):
    """Deflection under f(eps*r)/r^s versus the homogeneous f0/r^s.

    Both angles are computed at the same (rho, kappa = 2/|v_rel|^2); the
    returned envelope is eps^(3/10) + min(1, eps^(4/10)/rho^(s-1)).
    """
    if p_hom.kind != "pure_power" or p_hom.s <= 1.0:
        raise ValueError("angle_comparison requires a pure power law with s > 1")
    ok, why = comparison_region_ok(p_hom.s, eps, rho, v_rel_mag)
    if not ok:
        raise ValueError(f"inputs outside the comparison region: {why}")
    kappa = 2.0 / v_rel_mag**2
    p_eps = Potential.scaled_bump(p_hom.s, eps_scale=eps, f0=p_hom.f0, q=q)
    theta_eps = deflection_angle(p_eps, rho, kappa, spec)
    theta_hom = deflection_angle(p_hom, rho, kappa, spec)
    env = eps**0.3 + min(1.0, eps**0.4 / rho ** (p_hom.s - 1.0))
    return AngleComparison(theta_eps, theta_hom, env)
