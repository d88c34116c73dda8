import math

import pytest

from grazing.constants import (
    c_phi_fourier,
    c_phi_measured,
    c_phi_radial,
    timescale,
)
from grazing.potential import Potential


def test_timescale_branches():
    assert timescale(1e-2, 0.5) == pytest.approx(1e-4)
    assert timescale(1e-2, 1.0) == pytest.approx(1e-4 * math.log(100.0))
    with pytest.raises(ValueError):
        timescale(2.0, 0.5)
    with pytest.raises(ValueError):
        timescale(1e-2, 1.5)


def test_radial_frozen_values():
    got = c_phi_radial(Potential.poly_bump(0.25))
    assert got.value == pytest.approx(0.29694069885607627, rel=1e-9)
    assert got.method == "radial"
    # s = 0.5 comes out as a near-rational of the bump integrals
    assert c_phi_radial(Potential.poly_bump(0.5)).value == pytest.approx(
        0.5688888888884341, rel=1e-9
    )


@pytest.mark.parametrize("s", [0.0, 0.25, 0.5, 0.75])
def test_radial_fourier_identity(s):
    p = Potential.poly_bump(s)
    radial = c_phi_radial(p).value
    fourier = c_phi_fourier(p).value
    assert fourier == pytest.approx(radial, rel=1e-4)


def test_radial_amplitude_scaling():
    # the constant is quadratic in the amplitude f0
    one = c_phi_radial(Potential.poly_bump(0.5, f0=1.0)).value
    two = c_phi_radial(Potential.poly_bump(0.5, f0=2.0)).value
    assert two == pytest.approx(4.0 * one, rel=1e-10)


def test_s_equal_one_log_coefficient():
    p = Potential.poly_bump(1.0)
    radial = c_phi_radial(p)
    assert radial.value == pytest.approx(1.0)
    assert radial.details["candidate_squared"] == pytest.approx(1.0)
    fourier = c_phi_fourier(p)
    # the partial Fourier integral grows like f(0)^2 * log K
    assert fourier.value == pytest.approx(1.0, abs=5e-3)


def test_measured_matches_radial_for_soft_s():
    p = Potential.poly_bump(0.5)
    measured = c_phi_measured(p)
    assert measured.value == pytest.approx(
        c_phi_radial(p).value, rel=2e-3
    )


def test_measured_squared_amplitude_at_coulomb():
    # the decisive experiment: doubling f0 multiplies the s=1 coefficient
    # by ~4, identifying the squared-amplitude candidate
    one = c_phi_measured(Potential.poly_bump(1.0, f0=1.0)).value
    two = c_phi_measured(Potential.poly_bump(1.0, f0=2.0)).value
    assert two / one == pytest.approx(4.0, rel=0.1)


def test_domain_rejection():
    with pytest.raises(ValueError):
        c_phi_radial(Potential.poly_bump(1.5))
    with pytest.raises(ValueError):
        c_phi_fourier(Potential.poly_bump(1.5))
    with pytest.raises(ValueError):
        c_phi_radial(Potential.pure_power(0.5))
