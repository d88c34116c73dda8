"""Deterministic quadrature and root finding shared by every numerical module.

All rules here are fixed-node or adaptive-bisection constructions whose node
sets depend only on their inputs, so a given QuadSpec always reproduces the
same numbers.  Integrand callables must accept numpy arrays.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np


class NonConvergenceError(RuntimeError):
    """Adaptive rule exhausted its panel budget.

    Carries the best value and error estimate so callers can decide whether
    the partial result is still usable.
    """

    def __init__(self, message, value, error_estimate):
        super().__init__(message)
        self.value = value
        self.error_estimate = error_estimate


@dataclass(frozen=True)
class QuadSpec:
    """Resolution knobs for every deterministic rule in the package."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_panels: int = 2000
    circle_nodes: int = 16
    radial_nodes: int = 40
    sphere_nodes: int = 128
    mc_samples: int = 20000
    rng_seed: int = 20240801

    def __post_init__(self):
        if self.rel_tol <= 0.0 or self.abs_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_panels < 4:
            raise ValueError("max_panels must be at least 4")
        for name in ("circle_nodes", "radial_nodes", "sphere_nodes"):
            if getattr(self, name) < 4:
                raise ValueError(f"{name} must be at least 4")
        if self.mc_samples < 1:
            raise ValueError("mc_samples must be positive")

    def scaled(self, factor):
        """A coarser/finer copy, used for embedded error estimates."""
        return replace(
            self,
            circle_nodes=max(4, int(round(self.circle_nodes * factor))),
            radial_nodes=max(4, int(round(self.radial_nodes * factor))),
            sphere_nodes=max(4, int(round(self.sphere_nodes * factor))),
        )

    def rng(self):
        return np.random.default_rng(self.rng_seed)


DEFAULT_SPEC = QuadSpec()


@lru_cache(maxsize=64)
def gauss_legendre(n):
    """Nodes/weights on [-1, 1], cached."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gauss_panel(a, b, n):
    """Gauss-Legendre nodes and weights on [a, b]."""
    x, w = gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


# ---------------------------------------------------------------------------
# 1D adaptive integration
# ---------------------------------------------------------------------------

_GK_HI = 15
_GK_LO = 7


def _panel_estimate(fn, a, b):
    xh, wh = gauss_panel(a, b, _GK_HI)
    xl, wl = gauss_panel(a, b, _GK_LO)
    hi = float(np.dot(wh, fn(xh)))
    lo = float(np.dot(wl, fn(xl)))
    return hi, abs(hi - lo)


def _regularize(fn, a, b, singularity):
    """Substitute away an endpoint power singularity; returns (g, lo, hi)."""
    if singularity is None:
        return fn, a, b
    if isinstance(singularity, tuple):
        kind, alpha = singularity
        if kind != "power_left":
            raise ValueError(f"unknown singularity spec {singularity!r}")
    elif singularity == "inverse_sqrt_left":
        kind, alpha = "power_left", 0.5
    elif singularity == "inverse_sqrt_right":
        kind, alpha = "power_right", 0.5
    else:
        raise ValueError(f"unknown singularity spec {singularity!r}")

    if alpha >= 1.0:
        raise ValueError("power singularity must be integrable (alpha < 1)")
    m = 1.0 / (1.0 - alpha)

    if kind == "power_left":
        # x = a + t**m, integrand ~ (x-a)**(-alpha) becomes bounded
        def g(t):
            tm = t ** m
            return fn(a + tm) * m * tm / np.where(t > 0.0, t, 1.0)

        return g, 0.0, (b - a) ** (1.0 / m)

    def g(t):
        tm = t ** m
        return fn(b - tm) * m * tm / np.where(t > 0.0, t, 1.0)

    return g, 0.0, (b - a) ** (1.0 / m)


def integrate_1d(fn, a, b, singularity=None, spec=DEFAULT_SPEC):
    """Adaptive panel integration of fn over (a, b).

    singularity: None, "inverse_sqrt_left", "inverse_sqrt_right" or
    ("power_left", alpha) for an integrand growing like (x-a)**(-alpha).
    Returns (value, error_estimate); raises NonConvergenceError with the
    best value attached when the panel budget runs out.
    """
    if not a < b:
        raise ValueError(f"empty integration interval [{a}, {b}]")
    g, lo, hi = _regularize(fn, a, b, singularity)

    val, err = _panel_estimate(g, lo, hi)
    # heap entries: (-err, insertion counter, a, b, value, err)
    counter = 0
    heap = [(-err, counter, lo, hi, val, err)]
    total_val, total_err = val, err
    n_panels = 1

    while True:
        tol = spec.rel_tol * abs(total_val) + spec.abs_tol
        if total_err <= tol:
            return total_val, total_err
        if n_panels >= spec.max_panels:
            raise NonConvergenceError(
                f"integrate_1d: {spec.max_panels} panels reached, "
                f"error {total_err:.3e} > tol {tol:.3e}",
                total_val,
                total_err,
            )
        neg_err, _, pa, pb, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (pa + pb)
        v1, e1 = _panel_estimate(g, pa, mid)
        v2, e2 = _panel_estimate(g, mid, pb)
        total_val += v1 + v2 - pval
        total_err += e1 + e2 - perr
        counter += 1
        heapq.heappush(heap, (-e1, counter, pa, mid, v1, e1))
        counter += 1
        heapq.heappush(heap, (-e2, counter, mid, pb, v2, e2))
        n_panels += 1


# ---------------------------------------------------------------------------
# Root finding
# ---------------------------------------------------------------------------


def find_root_increasing(fn, bracket, tol):
    """Root of a strictly increasing fn with fn(lo) < 0 < fn(hi).

    Bisection with secant acceleration; terminates when the localization
    interval width drops below tol * max(|root|, tol).
    """
    lo, hi = bracket
    if not lo < hi:
        raise ValueError(f"invalid bracket ({lo}, {hi})")
    flo = float(fn(lo))
    fhi = float(fn(hi))
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if flo > 0.0:
        raise ValueError(f"fn(lo)={flo:.6e} is not negative at lo={lo!r}")
    if fhi < 0.0:
        raise ValueError(f"fn(hi)={fhi:.6e} is not positive at hi={hi!r}")

    for _ in range(300):
        width = hi - lo
        if width <= tol * max(abs(lo), abs(hi), tol):
            break
        # secant proposal, clipped away from the endpoints
        x = lo - flo * (hi - lo) / (fhi - flo)
        margin = 0.1 * width
        if not (lo + margin <= x <= hi - margin):
            x = lo + 0.5 * width
        fx = float(fn(x))
        if fx == 0.0:
            return x
        if fx < 0.0:
            lo, flo = x, fx
        else:
            hi, fhi = x, fx
    return 0.5 * (lo + hi)


def bisect_monotone_array(fn, lo, hi, n_iter=90):
    """Vectorized bisection for an elementwise-increasing fn.

    lo/hi are arrays bracketing each root (fn(lo) <= 0 <= fn(hi)).
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        neg = fn(mid) < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    return 0.5 * (lo + hi)


def impact_layout(scale, nodes_per_panel=8, n_inner=60, n_edge=16):
    """Gauss nodes/weights for integrals over the impact parameter (0, scale).

    Panels are geometric octaves [scale*2^-(k+1), scale*2^-k] going down
    n_inner levels (resolving the backscatter transition at small rho for
    arbitrarily weak coupling) plus octaves graded from the right endpoint
    (where compactly supported potentials lose smoothness).  The layout is
    a fixed multiple of `scale`, so two potentials whose supports differ by
    a factor delta get node sets that are exact delta-multiples of each
    other.  Weights do not include the rho factor of the measure rho*drho.
    """
    left = scale * 2.0 ** (-np.arange(n_inner, 0, -1, dtype=float))
    right = scale * (1.0 - 2.0 ** (-np.arange(2, n_edge + 1, dtype=float)))
    edges = np.concatenate([left, right, [scale]])
    nodes = []
    wts = []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gauss_panel(a, b, nodes_per_panel)
        nodes.append(x)
        wts.append(w)
    return np.concatenate(nodes), np.concatenate(wts)


# ---------------------------------------------------------------------------
# Circle and sphere rules
# ---------------------------------------------------------------------------


def circle_rule(n):
    """Uniform rule on S^1: angles and weights summing to 2*pi."""
    ang = 2.0 * np.pi * (np.arange(n) + 0.5) / n
    wts = np.full(n, 2.0 * np.pi / n)
    return ang, wts


def sphere_rule(n_nodes):
    """Product rule on S^2: Gauss in cos(polar) x uniform azimuth.

    Returns (directions (N,3), weights (N,)) with weights summing to 4*pi;
    N is approximately n_nodes.
    """
    n_mu = max(2, int(round(math.sqrt(n_nodes / 2.0))))
    n_az = 2 * n_mu
    mu, wmu = gauss_legendre(n_mu)
    az, waz = circle_rule(n_az)
    sin_pol = np.sqrt(1.0 - mu**2)
    dirs = np.empty((n_mu * n_az, 3))
    wts = np.empty(n_mu * n_az)
    k = 0
    for i in range(n_mu):
        dirs[k : k + n_az, 0] = sin_pol[i] * np.cos(az)
        dirs[k : k + n_az, 1] = sin_pol[i] * np.sin(az)
        dirs[k : k + n_az, 2] = mu[i]
        wts[k : k + n_az] = wmu[i] * waz
        k += n_az
    return dirs, wts


def maxwellian_weight(v):
    """M(v) = exp(-|v|^2/2) / (2*pi)^(3/2) for v of shape (..., 3)."""
    vv = np.asarray(v, dtype=float)
    return np.exp(-0.5 * np.sum(vv * vv, axis=-1)) / (2.0 * np.pi) ** 1.5


def gaussian_truncation_radius(abs_tol):
    """Radial cutoff leaving Gaussian tail mass below abs_tol."""
    return math.sqrt(2.0 * math.log(1.0 / max(abs_tol, 1e-300))) + 5.0


def maxwellian_nodes(spec, center):
    """Spherical product nodes for integrals against M(v2) centered at v1.

    Returns (points (N,3), weights (N,)) with weights containing the r^2
    Jacobian and the Maxwellian factor, so sum(w * fn(points)) approximates
    the integral of fn against M.  Shells centered at `center` cancel up to
    a |v - center|^(-2) singularity there.
    """
    center = np.asarray(center, dtype=float)
    radius = gaussian_truncation_radius(spec.abs_tol)
    r, wr = gauss_panel(0.0, radius, spec.radial_nodes)
    dirs, wd = sphere_rule(spec.sphere_nodes)
    pts = center[None, None, :] + r[:, None, None] * dirs[None, :, :]
    wts = (wr * r * r)[:, None] * wd[None, :]
    pts = pts.reshape(-1, 3)
    wts = wts.reshape(-1) * maxwellian_weight(pts)
    return pts, wts


def integrate_maxwellian_3d(fn, spec, center=(0.0, 0.0, 0.0)):
    """Integral of fn(v) against the Maxwellian weight over R^3.

    fn must accept an (N, 3) array and may have at most a |v - center|^(-2)
    singularity at the center (cancelled by the shell Jacobian).
    """
    pts, wts = maxwellian_nodes(spec, center)
    return float(np.dot(wts, fn(pts)))
