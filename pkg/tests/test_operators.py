import numpy as np
import pytest

from grazing.operators import (
    apply_linearized_boltzmann,
    apply_linearized_landau,
    apply_noncutoff_boltzmann,
    get_test_function,
    quadratic_form,
    test_function_names as shipped_function_names,
)
from grazing.potential import Potential
from grazing.quad import DEFAULT_SPEC

BUMP_HALF = Potential.poly_bump(0.5)


def test_registry_contents():
    names = shipped_function_names()
    for required in ("one", "vx", "vy", "vz", "speed2", "gaussian", "sine"):
        assert required in names
    with pytest.raises(ValueError):
        get_test_function("nope")


@pytest.mark.parametrize("name", sorted(shipped_function_names()))
def test_gradient_and_hessian_consistent(name):
    psi = get_test_function(name)
    rng = np.random.default_rng(7)
    v = rng.standard_normal(3)
    h = 1e-5
    grad = psi.gradient(v)
    hess = psi.hessian(v)
    assert np.allclose(hess, np.asarray(hess).T, atol=1e-13)
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (psi.value(v + e) - psi.value(v - e)) / (2.0 * h)
        assert grad[i] == pytest.approx(fd, rel=1e-7, abs=1e-9)
        fd_row = (psi.gradient(v + e) - psi.gradient(v - e)) / (2.0 * h)
        assert np.allclose(hess[i], fd_row, rtol=1e-6, atol=1e-8)


def test_invariants_annihilated():
    v1 = (1.0, 0.0, 0.0)
    for name in ("one", "vx", "speed2"):
        psi = get_test_function(name)
        assert psi.is_invariant
        bol = apply_linearized_boltzmann(psi, v1, 1e-1, BUMP_HALF)
        assert abs(bol.value) <= 10.0 * bol.error_estimate
        lan = apply_linearized_landau(psi, v1)
        assert abs(lan.value) <= 10.0 * lan.error_estimate


def test_boltzmann_frozen_value():
    psi = get_test_function("gaussian")
    got = apply_linearized_boltzmann(psi, (0.0, 0.0, 0.0), 1e-2, BUMP_HALF)
    assert got.value == pytest.approx(-0.0007681037225560309, rel=1e-5)
    assert got.value < 0.0
    assert got.error_estimate < 1e-5
    assert set(got.breakdown) >= {"near_field", "far_field"}


def test_boltzmann_zero_coupling_vanishes():
    psi = get_test_function("gaussian")
    got = apply_linearized_boltzmann(psi, (0.0, 0.0, 0.0), 0.0, BUMP_HALF)
    assert got.value == 0.0


def test_boltzmann_rejects_noncompact():
    psi = get_test_function("gaussian")
    with pytest.raises(ValueError):
        apply_linearized_boltzmann(psi, (0.0, 0.0, 0.0), 1e-2,
                                   Potential.pure_power(1.5))


def test_landau_frozen_values():
    psi = get_test_function("gaussian")
    center = apply_linearized_landau(psi, (0.0, 0.0, 0.0))
    assert center.value == pytest.approx(-2.1276921621409834, rel=1e-6)
    off = apply_linearized_landau(psi, (0.5, 0.0, 0.0))
    assert off.value == pytest.approx(-0.9566737648284659, rel=1e-6)
    assert isinstance(center.value, float)


def test_noncutoff_validation():
    psi = get_test_function("gaussian")
    with pytest.raises(ValueError):
        apply_noncutoff_boltzmann(psi, (0.0, 0.0, 0.0), BUMP_HALF, 400.0)
    with pytest.raises(ValueError):
        apply_noncutoff_boltzmann(
            psi, (0.0, 0.0, 0.0), Potential.pure_power(2.0), 5.0
        )


def test_noncutoff_tail_bound_shrinks_with_rho_max():
    psi = get_test_function("gaussian")
    p = Potential.pure_power(2.0)
    small = apply_noncutoff_boltzmann(psi, (0.0, 0.0, 0.0), p, 20.0)
    large = apply_noncutoff_boltzmann(psi, (0.0, 0.0, 0.0), p, 80.0)
    assert large.breakdown["tail_bound"] < small.breakdown["tail_bound"]
    assert large.value == pytest.approx(small.value, abs=5.0 * small.error_estimate)


def test_quadratic_form_nonpositive_and_reproducible():
    psi = get_test_function("gaussian")
    a = quadratic_form(psi, 1e-2, BUMP_HALF)
    b = quadratic_form(psi, 1e-2, BUMP_HALF)
    assert a.value == b.value  # seeded sampler
    assert a.value <= 3.0 * a.std_error
    assert a.n_samples == DEFAULT_SPEC.mc_samples
    assert a.std_error > 0.0
