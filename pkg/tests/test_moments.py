import math

import numpy as np
import pytest

from grazing.moments import (
    abs_sin3_moment,
    cube_moment,
    sin2_moment,
    sin2cos2_moment,
    sin4_moment,
    theta_curve,
    vhat_moments,
)
from grazing.potential import Potential

BUMP_HALF = Potential.poly_bump(0.5)
BUMP_ONE = Potential.poly_bump(1.0)


def test_theta_curve_is_positive_and_decreasing():
    rho, w, theta = theta_curve(BUMP_HALF, 1e-2)
    assert rho.shape == w.shape == theta.shape
    assert np.all(theta >= 0.0)
    # decreasing up to quadrature noise near the support edge
    assert np.all(np.diff(theta) < 1e-9)
    body = theta > 1e-6
    assert np.all(np.diff(theta[body]) < 0.0)


def test_sin2_frozen_value():
    assert sin2_moment(BUMP_HALF, 1e-3) == pytest.approx(
        5.694886735925486e-07, rel=1e-9
    )


def test_cube_frozen_value():
    assert cube_moment(BUMP_HALF, 1e-3) == pytest.approx(
        7.35092411788577e-09, rel=1e-9
    )


def test_sin2_small_kappa_quadratic_scaling():
    # sin^2 moment ~ c * kappa^2 for s < 1
    lo = sin2_moment(BUMP_HALF, 1e-4)
    hi = sin2_moment(BUMP_HALF, 2e-4)
    assert hi / lo == pytest.approx(4.0, rel=2e-3)


def test_sin2_coulomb_log_scaling():
    # at s = 1 the quadratic law picks up |log kappa|
    for kappa in (1e-3, 1e-4):
        ratio = sin2_moment(BUMP_ONE, kappa) / (
            kappa**2 * abs(math.log(kappa))
        )
        assert ratio == pytest.approx(1.0, abs=0.02)


def test_cube_moment_is_higher_order():
    # |theta|^3-type moment is o(kappa^2): the ratio to sin2 vanishes
    r1 = cube_moment(BUMP_HALF, 1e-3) / sin2_moment(BUMP_HALF, 1e-3)
    r2 = cube_moment(BUMP_HALF, 1e-4) / sin2_moment(BUMP_HALF, 1e-4)
    assert r2 < 0.5 * r1


def test_half_angle_moment_identities():
    # sin^2 = sin^4 + sin^2 cos^2 pointwise, hence also after integration
    kappa = 1e-2
    s2 = sin2_moment(BUMP_HALF, kappa)
    s4 = sin4_moment(BUMP_HALF, kappa)
    s22 = sin2cos2_moment(BUMP_HALF, kappa)
    assert s2 == pytest.approx(s4 + s22, rel=1e-10)
    assert abs_sin3_moment(BUMP_HALF, kappa) <= s2


def test_vhat_moments_frozen():
    m = vhat_moments((0.3, 0.1, -0.2), (1.0, 0.5, 0.0), 1e-2, BUMP_HALF)
    assert np.allclose(
        m.first, [0.00179962, 0.00102835, 0.00051418], atol=2e-8
    )
    assert m.third_abs == pytest.approx(7.584872795929658e-05, rel=1e-6)
    assert m.second[0, 1] == pytest.approx(-0.0003544, abs=2e-8)


def test_vhat_moment_structure():
    v1 = np.array([0.3, 0.1, -0.2])
    v2 = np.array([1.0, 0.5, 0.0])
    m = vhat_moments(v1, v2, 1e-2, BUMP_HALF)
    w = float(np.linalg.norm(v1 - v2))
    eta = (v1 - v2) / w
    # the mean jump points against the relative velocity
    assert np.allclose(np.cross(m.first, eta), 0.0, atol=1e-12)
    assert np.dot(m.first, eta) < 0.0
    # symmetric second moment with eta as an eigenvector
    assert np.allclose(m.second, m.second.T, atol=1e-15)
    ev = m.second @ eta
    assert np.allclose(np.cross(ev, eta), 0.0, atol=1e-12)
    # |vhat|^2 = -w (vhat . eta) along every trajectory, so the traces match
    assert np.trace(m.second) == pytest.approx(
        -w * float(np.dot(m.first, eta)), rel=1e-10
    )
    assert m.kappa == pytest.approx(2.0 * 1e-2 / w**2)
    assert m.v_rel == pytest.approx(w)
