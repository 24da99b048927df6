import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kickrotor import units
from kickrotor.propagator import DeltaKick, MomentumGrid, evolve
from kickrotor.states import Gaussian, build_state
from kickrotor.units import (
    K_B, PhysicalParams, RB85_MASS, ScaledParams, default_geometry, depth_from_intensity,
    derive_geometry, geometry_from_optics, intensity_for_depth, kick_strength, scale_params, scaled_hbar,
)

LAMBDA = 780e-9
GAMMA = math.radians(49.0)
# Rb D2 line
LINEWIDTH = 2 * math.pi * 6.07e6
SATURATION = 1.67e-3 / 1e-4  # 1.67 mW/cm^2 in W/m^2
DETUNING = 2 * math.pi * 20e9


def physical(period=96e-6, pulse=6e-6, depth_recoils=98.0, **kw):
    g = geometry_from_optics(LAMBDA, GAMMA)
    return PhysicalParams(LAMBDA, GAMMA, period, pulse, depth_recoils * g.recoil_energy, **kw)


def test_lattice_period_and_recoil():
    g = derive_geometry(physical())
    assert g.spacing == pytest.approx(0.940e-6, abs=0.004e-6)
    assert g.recoil_energy / K_B == pytest.approx(32e-9, abs=1e-9)
    assert g.spacing == pytest.approx(math.pi / g.wavevector, rel=1e-15)


def test_counterpropagating_limit():
    g = geometry_from_optics(LAMBDA, math.pi)
    assert g.spacing == pytest.approx(LAMBDA / 2, rel=1e-15)


@pytest.mark.parametrize("angle", [0.0, -0.1, math.pi + 1e-6])
def test_angle_outside_range_rejected(angle):
    with pytest.raises(ValueError):
        geometry_from_optics(LAMBDA, angle)


@pytest.mark.parametrize("pulse, expected", [(6e-6, 1.23), (8e-6, 1.64)])
def test_kick_strength(pulse, expected):
    p = scale_params(physical(pulse=pulse))
    assert p.k == pytest.approx(expected, abs=0.01)


def test_central_resonance_period():
    p = scale_params(physical())
    k_l = 2 * math.pi / 780e-9 * math.sin(math.radians(24.5))
    by_hand = 4 * 96e-6 * k_l**2 * 1.054571817e-34 / 1.41e-25
    assert p.hbar == pytest.approx(by_hand, rel=1e-9)
    # uncalibrated conversion sits ~2% above the nominal central resonance hbar = pi
    assert p.hbar / math.pi == pytest.approx(1.0201, abs=1e-4)
    assert p.duty == pytest.approx(6 / 96)


def test_pulse_longer_than_period_rejected():
    with pytest.raises(ValueError, match="t_p >= T"):
        physical(period=5e-6, pulse=6e-6)


def test_kappa_is_k_times_hbar():
    p = ScaledParams(2.7, 1.3, 0.1)
    assert p.kappa == p.k * p.hbar
    assert p.chi == p.kappa


@given(st.floats(1e-6, 500e-6), st.floats(1e-6, 500e-6))
def test_hbar_monotone_in_period(t1, t2):
    g = default_geometry()
    if t1 < t2:
        assert scaled_hbar(t1, g) < scaled_hbar(t2, g)


def test_depth_from_intensity_linear_and_signed():
    assert depth_from_intensity(0.0, DETUNING, LINEWIDTH, SATURATION) == 0.0
    v1 = depth_from_intensity(1e4, DETUNING, LINEWIDTH, SATURATION)
    assert depth_from_intensity(2e4, DETUNING, LINEWIDTH, SATURATION) == pytest.approx(2 * v1, rel=1e-15)
    assert depth_from_intensity(1e4, -DETUNING, LINEWIDTH, SATURATION) == -v1
    with pytest.raises(ValueError):
        depth_from_intensity(1e4, 0.0, LINEWIDTH, SATURATION)


def test_optical_chain_round_trip():
    g = default_geometry()
    target = 98 * g.recoil_energy
    intensity = intensity_for_depth(target, DETUNING, LINEWIDTH, SATURATION)
    # closed-form chain evaluated directly
    direct = intensity / SATURATION * units.HBAR * LINEWIDTH**2 / (8 * DETUNING)
    assert direct == pytest.approx(target, rel=1e-13)
    depth = depth_from_intensity(intensity, DETUNING, LINEWIDTH, SATURATION)
    p = PhysicalParams(LAMBDA, GAMMA, 96e-6, 6e-6, depth)
    assert scale_params(p).k == pytest.approx(1.23, abs=0.01)


def test_scale_invariance_of_dynamics():
    # a different wavelength/mass/period combination with the same scaled parameters
    a = physical()
    sa = scale_params(a)
    ga = derive_geometry(a)
    gb = geometry_from_optics(1064e-9, math.pi, 2 * RB85_MASS)
    period_b = sa.hbar * gb.mass / (4 * gb.wavevector**2 * units.HBAR)
    pulse_b = sa.duty * period_b
    depth_b = 2 * units.HBAR * sa.k / pulse_b
    b = PhysicalParams(1064e-9, math.pi, period_b, pulse_b, depth_b, mass=2 * RB85_MASS)
    sb = scale_params(b)
    assert sb.hbar == pytest.approx(sa.hbar, rel=1e-14)
    assert sb.k == pytest.approx(sa.k, rel=1e-14)

    grid = MomentumGrid(16, 64)
    # same width in lattice units -> same scaled state
    xa = 0.2 * ga.spacing
    ea = evolve(build_state(Gaussian(xa), grid, ga), sa, DeltaKick(), 8)[1]
    eb = evolve(build_state(Gaussian(0.2 * gb.spacing), grid, gb),
                ScaledParams(sa.hbar, sa.k, sa.duty), DeltaKick(), 8)[1]
    np.testing.assert_allclose(ea, eb, rtol=0, atol=1e-12)
