"""Initial wavefunctions and incoherent ensembles."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .propagator import MOMENTUM, POSITION, MomentumGrid, WaveState, energy, plane_wave
from .units import HBAR, K_B, LatticeGeometry

#: smallest ensemble for which averages are trusted without a warning
MIN_MEMBERS = 8
WRAP_TOLERANCE = 1e-12


@dataclass(frozen=True)
class PlaneWave:
    beta: float = 0.0

    def __post_init__(self):
        if not 0 <= self.beta < 1:
            raise ValueError(f"beta must lie in [0, 1), got {self.beta!r}")


@dataclass(frozen=True)
class Gaussian:
    """Single Gaussian with rms position width ``width`` (m).

    ``center`` is measured in metres from the potential minimum of the
    central well; ``None`` puts it exactly on that minimum.
    """

    width: float
    center: float | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("Gaussian width must be positive")


@dataclass(frozen=True)
class Comb:
    """In-phase Gaussians, one per well, under a Gaussian envelope."""

    width: float
    envelope: float
    spacing: float | None = None  # defaults to the lattice period

    def __post_init__(self):
        if not (self.width > 0 and self.envelope > 0):
            raise ValueError("comb widths must be positive")
        if self.spacing is not None and not self.spacing > 0:
            raise ValueError("comb spacing must be positive")


@dataclass(frozen=True)
class ThermalMixture:
    """Incoherent mixture of single-well band surrogates.

    Band velocity widths are in m/s; ``envelope`` (m) is the rms extent of
    the cloud from which wells are drawn.
    """

    members: int = 64
    velocities: tuple[float, ...] = (3.43e-3, math.sqrt(3) * 3.43e-3)
    weights: tuple[float, ...] = (0.5, 0.5)
    envelope: float = 1.09e-6
    seed: int = 0

    def __post_init__(self):
        if self.members < 1:
            raise ValueError("an ensemble needs at least one member")
        if len(self.velocities) != len(self.weights):
            raise ValueError("one weight per band velocity is required")
        if any(v <= 0 for v in self.velocities) or any(w < 0 for w in self.weights):
            raise ValueError("band velocities must be positive and weights non-negative")
        if abs(sum(self.weights) - 1) > 1e-12:
            raise ValueError(f"band weights must sum to 1, got {sum(self.weights)!r}")


InitialStateSpec = Union[PlaneWave, Gaussian, Comb]


@dataclass
class Ensemble:
    members: list[tuple[float, WaveState]] = field(default_factory=list)

    def __post_init__(self):
        total = sum(w for w, _ in self.members)
        if self.members and abs(total - 1) > 1e-12:
            raise ValueError(f"ensemble weights must sum to 1, got {total!r}")

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.members])

    @property
    def states(self) -> list[WaveState]:
        return [s for _, s in self.members]

    def energy(self) -> float:
        return float(sum(w * energy(s) for w, s in self.members))

    def __len__(self):
        return len(self.members)


def width_from_velocity(velocity: float, mass: float) -> float:
    """Minimum-uncertainty position width x0 = hbar / (2 m v0)."""
    return HBAR / (2 * mass * velocity)


def velocity_from_width(width: float, mass: float) -> float:
    return HBAR / (2 * mass * width)


def velocity_from_temperature(temperature: float, mass: float) -> float:
    return math.sqrt(K_B * temperature / mass)


def _centered_theta(grid: MomentumGrid, center: float) -> np.ndarray:
    """Signed periodic distance from ``center`` in theta units."""
    span = 2 * np.pi * grid.periods
    return (grid.theta - center + span / 2) % span - span / 2


def _well_minimum(grid: MomentumGrid) -> float:
    # 1 + cos(theta) is minimal at theta = pi; use the middle well of the grid
    return np.pi * (2 * (grid.periods // 2) + 1)


def _check_resolution(width: float, geometry: LatticeGeometry, grid: MomentumGrid) -> None:
    spacing = geometry.spacing / grid.points_per_period
    if width < 2 * spacing:
        raise ValueError(
            f"width {width:.3e} m is undersampled: grid spacing is {spacing:.3e} m, "
            "need at least two points per rms width"
        )


def _finish(grid: MomentumGrid, psi: np.ndarray, d: np.ndarray, what: str) -> WaveState:
    # amplitude left in the half period opposite the center means the profile wraps
    peak = np.abs(psi).max()
    far = np.abs(d) >= np.pi * (grid.periods - 1)
    edge = np.abs(psi[far]).max() if grid.periods > 1 else 0.0
    if peak == 0:
        raise ValueError(f"{what} vanishes on the grid")
    if edge / peak > WRAP_TOLERANCE:
        raise ValueError(
            f"{what} does not fit in {grid.periods} lattice periods "
            f"(relative amplitude {edge / peak:.2e} at the box edge)"
        )
    psi = psi / np.sqrt(np.sum(np.abs(psi) ** 2))
    return WaveState(grid, psi, POSITION)


def build_state(spec: InitialStateSpec, grid: MomentumGrid, geometry: LatticeGeometry) -> WaveState:
    if isinstance(spec, PlaneWave):
        slot = spec.beta * grid.periods
        if abs(slot - round(slot)) > 1e-9:
            raise ValueError(f"beta={spec.beta} is not a multiple of 1/{grid.periods}")
        return plane_wave(grid, 0, int(round(slot)))

    to_theta = 2 * np.pi / geometry.spacing
    if isinstance(spec, Gaussian):
        _check_resolution(spec.width, geometry, grid)
        center = _well_minimum(grid) + (spec.center or 0.0) * to_theta
        d = _centered_theta(grid, center)
        sigma = spec.width * to_theta
        return _finish(grid, np.exp(-d**2 / (4 * sigma**2)), d, "Gaussian")

    if isinstance(spec, Comb):
        _check_resolution(spec.width, geometry, grid)
        d = _centered_theta(grid, _well_minimum(grid))
        sigma = spec.width * to_theta
        envelope = spec.envelope * to_theta
        period = (spec.spacing or geometry.spacing) * to_theta
        reach = int(np.ceil(np.pi * grid.periods / period)) + 1
        offsets = period * np.arange(-reach, reach + 1)
        teeth = np.exp(-(d[:, None] - offsets[None, :]) ** 2 / (4 * sigma**2)).sum(axis=1)
        return _finish(grid, np.exp(-d**2 / (4 * envelope**2)) * teeth, d, "comb")

    raise TypeError(f"unsupported initial state {spec!r}")


def single_state(spec: InitialStateSpec, grid: MomentumGrid, geometry: LatticeGeometry) -> Ensemble:
    return Ensemble([(1.0, build_state(spec, grid, geometry))])


def thermal_members(spec: ThermalMixture, geometry: LatticeGeometry) -> list[tuple[float, Gaussian]]:
    """Draw the (band, well) assignment of every member; pure given the seed."""
    rng = np.random.default_rng(spec.seed)
    bands = rng.choice(len(spec.velocities), size=spec.members, p=np.asarray(spec.weights))
    wells = np.rint(rng.normal(0.0, spec.envelope, size=spec.members) / geometry.spacing)
    weight = 1.0 / spec.members
    return [
        (weight, Gaussian(width_from_velocity(spec.velocities[b], geometry.mass),
                          center=float(w) * geometry.spacing))
        for b, w in zip(bands, wells)
    ]


def build_thermal_ensemble(spec: ThermalMixture, grid: MomentumGrid,
                           geometry: LatticeGeometry) -> Ensemble:
    if spec.members < MIN_MEMBERS:
        warnings.warn(
            f"{spec.members} ensemble members is below {MIN_MEMBERS}; ensemble averages "
            "will be noisy", RuntimeWarning, stacklevel=2)
    members = thermal_members(spec, geometry)
    return Ensemble([(w, build_state(g, grid, geometry)) for w, g in members])


def build_ensemble(spec: InitialStateSpec | ThermalMixture, grid: MomentumGrid,
                   geometry: LatticeGeometry) -> Ensemble:
    if isinstance(spec, ThermalMixture):
        return build_thermal_ensemble(spec, grid, geometry)
    return single_state(spec, grid, geometry)


def quasimomentum_weights(state: WaveState) -> np.ndarray:
    """Total population in each quasimomentum slot beta = w/W."""
    grid = state.grid
    return np.bincount(grid.offset, weights=state.populations(), minlength=grid.periods)


def well_amplitudes(state: WaveState, wells: Sequence[int] | None = None) -> np.ndarray:
    """Position amplitudes sampled at the potential minimum of each well."""
    grid = state.grid
    psi = state.in_position().amplitudes
    if wells is None:
        wells = range(grid.periods)
    m = grid.points_per_period
    return np.array([psi[w * m + m // 2] for w in wells])
