import math

import numpy as np
import pytest

from grazing.quad import (
    DEFAULT_SPEC,
    NonConvergenceError,
    QuadSpec,
    bisect_monotone_array,
    circle_rule,
    find_root_increasing,
    gauss_legendre,
    gauss_panel,
    gaussian_truncation_radius,
    impact_layout,
    integrate_1d,
    integrate_maxwellian_3d,
    maxwellian_weight,
    sphere_rule,
)


def test_gauss_legendre_polynomial_exactness():
    # an n-point rule integrates degree 2n-1 exactly
    for n in (2, 5, 12):
        x, w = gauss_legendre(n)
        for deg in range(2 * n):
            exact = (1.0 - (-1.0) ** (deg + 1)) / (deg + 1)
            assert np.dot(w, x**deg) == pytest.approx(exact, abs=1e-13)


def test_gauss_panel_affine_map():
    x, w = gauss_panel(2.0, 5.0, 8)
    assert x.min() > 2.0 and x.max() < 5.0
    assert w.sum() == pytest.approx(3.0, rel=1e-14)
    assert np.dot(w, x**3) == pytest.approx((5.0**4 - 2.0**4) / 4.0, rel=1e-14)


def test_integrate_1d_smooth():
    value, err = integrate_1d(lambda x: np.cos(x), 0.0, 2.0)
    assert value == pytest.approx(math.sin(2.0), abs=1e-12)
    assert err < 1e-10


def test_integrate_1d_inverse_sqrt_endpoints():
    # int_0^1 dx / sqrt(x) = 2
    value, _ = integrate_1d(lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, "inverse_sqrt_left")
    assert value == pytest.approx(2.0, abs=1e-10)
    # int_0^1 dx / sqrt(1-x) = 2
    value, _ = integrate_1d(
        lambda x: 1.0 / np.sqrt(1.0 - x), 0.0, 1.0, "inverse_sqrt_right"
    )
    assert value == pytest.approx(2.0, abs=1e-10)


def test_integrate_1d_power_singularity():
    # int_0^1 x^(-0.7) dx = 1/0.3
    value, _ = integrate_1d(
        lambda x: x**-0.7, 0.0, 1.0, ("power_left", 0.7)
    )
    assert value == pytest.approx(1.0 / 0.3, rel=1e-10)


def test_integrate_1d_nonconvergence_carries_partial_value():
    tight = QuadSpec(rel_tol=1e-15, abs_tol=1e-16, max_panels=4)
    with pytest.raises(NonConvergenceError) as info:
        integrate_1d(lambda x: 1.0 / np.sqrt(np.abs(x - 0.37)), 0.0, 1.0, None, tight)
    # exact integral is 2*(sqrt(0.37)+sqrt(0.63)) = 3.804; the partial
    # estimate is finite and in the right ballpark
    assert 1.0 < info.value.value < 4.5
    assert info.value.error_estimate > 0.0


def test_find_root_increasing():
    root = find_root_increasing(lambda x: x**3 - 2.0, (0.0, 2.0), 1e-14)
    assert root == pytest.approx(2.0 ** (1.0 / 3.0), abs=1e-13)


def test_bisect_monotone_array():
    # roots of f(x) = x^2 - c for a batch of c
    c = np.array([0.25, 1.0, 2.25])
    roots = bisect_monotone_array(
        lambda x: x * x - c, np.zeros(3), np.full(3, 4.0)
    )
    assert np.allclose(roots, np.sqrt(c), atol=1e-12)


def test_impact_layout_covers_and_scales():
    rho, w = impact_layout(1.0)
    assert rho.min() > 0.0 and rho.max() < 1.0
    assert w.sum() == pytest.approx(1.0, rel=1e-12)
    # integral of rho drho over the layout
    assert np.dot(w, rho) == pytest.approx(0.5, rel=1e-10)
    # exact multiplicative scaling: nodes and weights stretch with the scale
    rho2, w2 = impact_layout(7.5)
    assert np.allclose(rho2, 7.5 * rho, rtol=1e-15)
    assert np.allclose(w2, 7.5 * w, rtol=1e-15)


def test_circle_rule_trig_moments():
    phi, w = circle_rule(16)
    assert w.sum() == pytest.approx(2.0 * math.pi, rel=1e-14)
    assert np.dot(w, np.cos(phi)) == pytest.approx(0.0, abs=1e-13)
    assert np.dot(w, np.cos(phi) ** 2) == pytest.approx(math.pi, rel=1e-13)
    assert np.dot(w, np.sin(phi) * np.cos(phi)) == pytest.approx(0.0, abs=1e-13)


def test_sphere_rule_moments():
    nodes, w = sphere_rule(128)
    assert w.sum() == pytest.approx(4.0 * math.pi, rel=1e-12)
    assert np.allclose(w @ nodes, 0.0, atol=1e-12)
    second = (nodes.T * w) @ nodes
    assert np.allclose(second, (4.0 * math.pi / 3.0) * np.eye(3), atol=1e-10)


def test_maxwellian_normalization():
    value = integrate_maxwellian_3d(lambda v: np.ones(v.shape[0]), DEFAULT_SPEC)
    assert value == pytest.approx(1.0, abs=1e-10)
    # second moment of the unit-temperature Maxwellian: <|v|^2> = 3
    value = integrate_maxwellian_3d(lambda v: np.sum(v * v, axis=1), DEFAULT_SPEC)
    assert value == pytest.approx(3.0, abs=1e-9)


def test_maxwellian_weight_peak():
    w0 = maxwellian_weight(np.zeros((1, 3)))[0]
    assert w0 == pytest.approx((2.0 * math.pi) ** -1.5, rel=1e-14)


def test_gaussian_truncation_radius_captures_tail():
    r = gaussian_truncation_radius(1e-12)
    assert math.exp(-0.5 * r * r) < 1e-12


def test_quadspec_scaled_and_rng():
    spec = DEFAULT_SPEC.scaled(0.5)
    assert spec.radial_nodes == max(4, round(0.5 * DEFAULT_SPEC.radial_nodes))
    assert spec.circle_nodes == max(4, round(0.5 * DEFAULT_SPEC.circle_nodes))
    a = DEFAULT_SPEC.rng().standard_normal(4)
    b = DEFAULT_SPEC.rng().standard_normal(4)
    assert np.array_equal(a, b)
