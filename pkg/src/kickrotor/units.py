"""Physical <-> scaled parameter conversions for the atom-optics kicked rotor.

Everything downstream of this module works in scaled units: the dynamics are
fully set by the scaled Planck constant, the kick strength and the pulse duty
fraction.  Physical units only appear here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import constants

HBAR = constants.hbar
K_B = constants.k

#: 85Rb atomic mass in kg.
RB85_MASS = 1.4100e-25


@dataclass(frozen=True)
class PhysicalParams:
    """Experimental knobs.

    ``angle`` is the full intersection angle between the two lattice beams
    (radians); ``depth`` is the lattice depth V0 in joules.
    """

    wavelength: float
    angle: float
    period: float
    pulse_width: float
    depth: float
    mass: float = RB85_MASS

    def __post_init__(self):
        for name in ("wavelength", "period", "pulse_width", "depth", "mass"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not 0 < self.angle <= math.pi:
            raise ValueError(f"beam angle must lie in (0, pi], got {self.angle!r}")
        if self.pulse_width >= self.period:
            raise ValueError("t_p >= T: pulse width must be shorter than the kick period")


@dataclass(frozen=True)
class LatticeGeometry:
    wavevector: float  # k_L in 1/m
    spacing: float  # lattice period l in m
    recoil_energy: float  # E_r in J
    mass: float = RB85_MASS

    @property
    def recoil_temperature(self) -> float:
        return self.recoil_energy / K_B


@dataclass(frozen=True)
class ScaledParams:
    hbar: float  # scaled Planck constant
    k: float  # kick strength (phase imprinted per kick)
    duty: float = 0.0  # t_p / T

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"scaled hbar must be positive, got {self.hbar!r}")
        if self.k < 0:
            raise ValueError(f"kick strength must be non-negative, got {self.k!r}")
        if not 0 <= self.duty < 1:
            raise ValueError(f"duty must lie in [0, 1), got {self.duty!r}")

    @property
    def kappa(self) -> float:
        """Stochasticity parameter k * hbar."""
        return self.k * self.hbar

    @property
    def chi(self) -> float:
        """Delta-limit potential strength; equals kappa by construction."""
        return self.kappa


def geometry_from_optics(wavelength: float, angle: float, mass: float = RB85_MASS) -> LatticeGeometry:
    if not 0 < angle <= math.pi:
        raise ValueError(f"beam angle must lie in (0, pi], got {angle!r}")
    if not wavelength > 0 or not mass > 0:
        raise ValueError("wavelength and mass must be positive")
    k_l = 2 * math.pi / wavelength * math.sin(angle / 2)
    return LatticeGeometry(
        wavevector=k_l,
        spacing=math.pi / k_l,
        recoil_energy=HBAR**2 * k_l**2 / (2 * mass),
        mass=mass,
    )


def derive_geometry(p: PhysicalParams) -> LatticeGeometry:
    return geometry_from_optics(p.wavelength, p.angle, p.mass)


def scaled_hbar(period: float, geometry: LatticeGeometry) -> float:
    """hbar_eff = 4 T k_L^2 hbar / m."""
    return 4 * period * geometry.wavevector**2 * HBAR / geometry.mass


def period_from_hbar(hbar_eff: float, geometry: LatticeGeometry) -> float:
    return hbar_eff * geometry.mass / (4 * geometry.wavevector**2 * HBAR)


def kick_strength(depth: float, pulse_width: float) -> float:
    """k = V0 t_p / (2 hbar)."""
    return depth * pulse_width / (2 * HBAR)


def scale_params(p: PhysicalParams, g: LatticeGeometry | None = None) -> ScaledParams:
    if g is None:
        g = derive_geometry(p)
    if p.pulse_width >= p.period:
        raise ValueError("t_p >= T: pulse width must be shorter than the kick period")
    return ScaledParams(
        hbar=scaled_hbar(p.period, g),
        k=kick_strength(p.depth, p.pulse_width),
        duty=p.pulse_width / p.period,
    )


def depth_from_intensity(intensity: float, detuning: float, linewidth: float,
                         saturation_intensity: float) -> float:
    """Lattice depth V0 = (I0/I_s) hbar Gamma^2 / (8 Delta).

    ``detuning`` and ``linewidth`` are angular frequencies.  The sign of the
    result follows the sign of the detuning.
    """
    if detuning == 0:
        raise ValueError("zero detuning: the light shift diverges")
    if not saturation_intensity > 0:
        raise ValueError("saturation intensity must be positive")
    return intensity / saturation_intensity * HBAR * linewidth**2 / (8 * detuning)


def intensity_for_depth(depth: float, detuning: float, linewidth: float,
                        saturation_intensity: float) -> float:
    """Inverse of :func:`depth_from_intensity`."""
    if detuning == 0:
        raise ValueError("zero detuning: the light shift diverges")
    return depth * saturation_intensity * 8 * detuning / (HBAR * linewidth**2)


def recoils_to_joules(value: float, geometry: LatticeGeometry) -> float:
    return value * geometry.recoil_energy


def energy_to_temperature(energy_recoils: float, geometry: LatticeGeometry) -> float:
    """Kinetic temperature (dp)^2 / (m k_B) for a mean kinetic energy in E_r."""
    return 2 * energy_recoils * geometry.recoil_energy / K_B


DEFAULT_WAVELENGTH = 780e-9
DEFAULT_ANGLE = math.radians(49.0)


def default_geometry() -> LatticeGeometry:
    """Lattice of the reference experiment: 780 nm beams crossing at 49 degrees, 85Rb."""
    return geometry_from_optics(DEFAULT_WAVELENGTH, DEFAULT_ANGLE, RB85_MASS)
