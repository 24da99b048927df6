"""Split-step propagation of the scaled kicked-rotor Schrodinger equation.

Position samples cover ``W`` lattice periods with ``M`` points each
(theta = 2 k_L x, so one lattice period is 2 pi).  The discrete Fourier
transform of that grid is the momentum ladder q = n + w/W in units of the
photon-pair recoil 2 hbar k_L, i.e. integer rungs n with W quasimomentum
offsets beta = w/W.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from typing import Union

import numpy as np

from .units import ScaledParams

POSITION = "position"
MOMENTUM = "momentum"

#: fraction of the ladder (split over both ends) watched by the aliasing guard
GUARD_FRACTION = 0.05
GUARD_TOLERANCE = 1e-8


class MomentumCutoffError(RuntimeError):
    """Population reached the edge of the momentum grid."""

    def __init__(self, population: float, kicks: int):
        self.population = population
        self.kicks = kicks
        super().__init__(
            f"momentum-cutoff overflow after kick {kicks}: population {population:.3e} "
            f"in the outer {GUARD_FRACTION:.0%} of the ladder (limit {GUARD_TOLERANCE:g}); "
            "increase points_per_period"
        )


@dataclass(frozen=True)
class MomentumGrid:
    periods: int = 64
    points_per_period: int = 64

    def __post_init__(self):
        m = self.points_per_period
        if self.periods < 1:
            raise ValueError("periods must be >= 1")
        if m < 16 or m & (m - 1):
            raise ValueError(f"points_per_period must be a power of two >= 16, got {m}")

    @property
    def size(self) -> int:
        return self.periods * self.points_per_period

    @cached_property
    def theta(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.size) / self.points_per_period

    @cached_property
    def ladder_index(self) -> np.ndarray:
        """Integer index j with q = j / W, in FFT order."""
        return np.fft.fftfreq(self.size, 1.0 / self.size).astype(np.int64)

    @cached_property
    def momentum(self) -> np.ndarray:
        return self.ladder_index / self.periods

    @cached_property
    def rung(self) -> np.ndarray:
        """Integer part n of each ladder value (q = n + w/W, 0 <= w < W)."""
        return np.floor_divide(self.ladder_index, self.periods)

    @cached_property
    def offset(self) -> np.ndarray:
        """Quasimomentum slot w of each ladder value."""
        return np.mod(self.ladder_index, self.periods)

    @cached_property
    def guard_mask(self) -> np.ndarray:
        edge = (1 - GUARD_FRACTION) * self.size / 2
        return np.abs(self.ladder_index) >= edge

    def lattice_shift(self) -> int:
        """Number of samples in one lattice period."""
        return self.points_per_period


@dataclass
class WaveState:
    grid: MomentumGrid
    amplitudes: np.ndarray
    representation: str = POSITION
    kicks: int = 0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} amplitudes, got {self.amplitudes.shape}")
        if self.representation not in (POSITION, MOMENTUM):
            raise ValueError(f"unknown representation {self.representation!r}")

    def in_position(self) -> "WaveState":
        if self.representation == POSITION:
            return self
        return replace(self, amplitudes=np.fft.ifft(self.amplitudes, norm="ortho"),
                       representation=POSITION)

    def in_momentum(self) -> "WaveState":
        if self.representation == MOMENTUM:
            return self
        return replace(self, amplitudes=np.fft.fft(self.amplitudes, norm="ortho"),
                       representation=MOMENTUM)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def populations(self) -> np.ndarray:
        """Momentum-ladder populations in FFT order (see ``grid.momentum``)."""
        return np.abs(self.in_momentum().amplitudes) ** 2

    def copy(self) -> "WaveState":
        return replace(self, amplitudes=self.amplitudes.copy())


@dataclass(frozen=True)
class DeltaKick:
    pass


@dataclass(frozen=True)
class SquarePulse:
    duty: float
    substeps: int = 16

    def __post_init__(self):
        if not 0 < self.duty < 1:
            raise ValueError(f"square-pulse duty must lie in (0, 1), got {self.duty!r}")
        if self.substeps < 1:
            raise ValueError("substeps must be >= 1")


PulseShape = Union[DeltaKick, SquarePulse]


def check_cutoff(state: WaveState) -> None:
    pops = state.populations()
    outer = float(pops[state.grid.guard_mask].sum())
    if outer >= GUARD_TOLERANCE:
        raise MomentumCutoffError(outer, state.kicks)


def _kick_phase(state: WaveState, strength: float) -> WaveState:
    s = state.in_position()
    phase = np.exp(-1j * strength * (1 + np.cos(s.grid.theta)))
    return replace(s, amplitudes=s.amplitudes * phase)


def _free_phase(state: WaveState, hbar: float, tau: float) -> WaveState:
    s = state.in_momentum()
    q = s.grid.momentum
    return replace(s, amplitudes=s.amplitudes * np.exp(-0.5j * hbar * tau * q * q))


def apply_kick(state: WaveState, k: float, check: bool = True) -> WaveState:
    """Delta kick exp[-i k (1 + cos theta)]; returns the state in momentum form."""
    s = _kick_phase(state, k)
    s = replace(s, kicks=state.kicks + 1).in_momentum()
    if check:
        check_cutoff(s)
    return s


def free_evolve(state: WaveState, hbar: float, tau: float = 1.0) -> WaveState:
    if tau < 0:
        raise ValueError("free evolution time must be non-negative")
    return _free_phase(state, hbar, tau)


def _square_pulse(state: WaveState, k: float, hbar: float, shape: SquarePulse, sign: int) -> WaveState:
    dt = shape.duty / shape.substeps
    s = state
    for _ in range(shape.substeps):
        s = _free_phase(s, hbar, sign * dt / 2)
        s = _kick_phase(s, sign * k / shape.substeps)
        s = _free_phase(s, hbar, sign * dt / 2)
    return s


def cycle(state: WaveState, params: ScaledParams, shape: PulseShape = DeltaKick(),
          check: bool = True) -> WaveState:
    """Propagate through one kick period (kick, then free flight)."""
    if isinstance(shape, DeltaKick):
        s = apply_kick(state, params.k, check=False)
        s = _free_phase(s, params.hbar, 1.0)
    else:
        s = _square_pulse(state, params.k, params.hbar, shape, +1)
        s = _free_phase(s, params.hbar, 1.0 - shape.duty)
        s = replace(s, kicks=state.kicks + 1)
    if check:
        check_cutoff(s)
    return s


def cycle_inverse(state: WaveState, params: ScaledParams, shape: PulseShape = DeltaKick()) -> WaveState:
    """Exact inverse of :func:`cycle`: conjugate phases applied in reverse order."""
    if isinstance(shape, DeltaKick):
        s = _free_phase(state, params.hbar, -1.0)
        s = _kick_phase(s, -params.k)
    else:
        s = _free_phase(state, params.hbar, -(1.0 - shape.duty))
        s = _square_pulse(s, params.k, params.hbar, shape, -1)
    return replace(s, kicks=state.kicks - 1)


def energy(state: WaveState) -> float:
    """Mean kinetic energy in recoil units, 4 <(n + beta)^2>."""
    c = state.in_momentum().amplitudes
    q = state.grid.momentum
    return float(4 * np.sum(np.abs(c) ** 2 * q * q))


def evolve(state: WaveState, params: ScaledParams, shape: PulseShape = DeltaKick(),
           n_kicks: int = 1, check: bool = True) -> tuple[WaveState, np.ndarray]:
    """Apply ``n_kicks`` cycles; returns the final state and E/E_r before and after each cycle."""
    if n_kicks < 0:
        raise ValueError("n_kicks must be non-negative")
    energies = np.empty(n_kicks + 1)
    energies[0] = energy(state)
    s = state
    for i in range(n_kicks):
        s = cycle(s, params, shape, check=check)
        energies[i + 1] = energy(s)
    return s, energies


def plane_wave(grid: MomentumGrid, rung: int = 0, offset: int = 0) -> WaveState:
    """Single ladder state q = rung + offset / W, in momentum form."""
    c = np.zeros(grid.size, dtype=complex)
    c[(rung * grid.periods + offset) % grid.size] = 1.0
    return WaveState(grid, c, MOMENTUM)
