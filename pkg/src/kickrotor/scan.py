"""Energy-versus-period sweeps, resonance detection and peak growth."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence, Union

import numpy as np
from scipy.signal import find_peaks

from .propagator import DeltaKick, MomentumCutoffError, MomentumGrid, PulseShape, SquarePulse, evolve
from .states import Ensemble, InitialStateSpec, ThermalMixture, build_ensemble
from .units import LatticeGeometry, ScaledParams, default_geometry, period_from_hbar

FIXED_K = "fixed-k"
FIXED_HARDWARE = "fixed-hardware"


class ScanError(RuntimeError):
    """One or more sweep points failed; the scan as a whole is invalid."""

    def __init__(self, failures: dict[int, Exception], hbar: np.ndarray):
        self.failures = failures
        lines = [f"hbar/pi={hbar[i] / np.pi:.6g}: {err}" for i, err in sorted(failures.items())]
        super().__init__(f"{len(failures)} sweep point(s) failed:\n  " + "\n  ".join(lines))


class InsufficientResolution(ValueError):
    pass


def hbar_sweep(start: float, stop: float, step: float) -> np.ndarray:
    """Scaled-hbar values from ``start`` to ``stop`` (inclusive) in units of pi."""
    if step <= 0 or stop < start:
        raise ValueError("sweep needs step > 0 and stop >= start")
    first = round(start / step)
    count = int(np.floor((stop - first * step) / step + 1e-9)) + 1
    return np.pi * step * (first + np.arange(count))


@dataclass(frozen=True)
class ScanConfig:
    """Sweep of the scaled Planck constant at fixed kick strength.

    In ``fixed-hardware`` mode with a square pulse the pulse width
    ``pulse_width`` (s) is held fixed, so the duty fraction follows the
    kick period of each point.
    """

    hbar: tuple[float, ...]
    n_kicks: int = 16
    k: float = 1.6
    shape: PulseShape = DeltaKick()
    state: Union[InitialStateSpec, ThermalMixture] = None
    grid: MomentumGrid = MomentumGrid(64, 128)
    geometry: LatticeGeometry = field(default_factory=default_geometry)
    mode: str = FIXED_K
    pulse_width: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "hbar", tuple(float(h) for h in self.hbar))
        h = np.asarray(self.hbar)
        if np.any(h <= 0):
            raise ValueError("scaled hbar values must be positive")
        if np.any(np.diff(h) <= 0):
            raise ValueError("sweep must be strictly increasing")
        if self.n_kicks < 0:
            raise ValueError("n_kicks must be non-negative")
        if self.state is None:
            raise ValueError("an initial state is required")
        if self.mode not in (FIXED_K, FIXED_HARDWARE):
            raise ValueError(f"unknown sweep mode {self.mode!r}")
        if self.mode == FIXED_HARDWARE and isinstance(self.shape, SquarePulse):
            if not self.pulse_width or self.pulse_width <= 0:
                raise ValueError("fixed-hardware square pulses need a pulse width")
            if self.pulse_width >= self.periods().min():
                raise ValueError("t_p >= T for part of the sweep")

    @classmethod
    def from_periods(cls, periods: Sequence[float], **kw) -> "ScanConfig":
        geometry = kw.get("geometry") or default_geometry()
        from .units import scaled_hbar
        return cls(hbar=tuple(scaled_hbar(t, geometry) for t in periods), **kw)

    def periods(self) -> np.ndarray:
        return np.array([period_from_hbar(h, self.geometry) for h in self.hbar])

    def point(self, i: int) -> tuple[ScaledParams, PulseShape]:
        h = self.hbar[i]
        shape = self.shape
        if self.mode == FIXED_HARDWARE and isinstance(shape, SquarePulse):
            shape = replace(shape, duty=self.pulse_width / period_from_hbar(h, self.geometry))
        duty = shape.duty if isinstance(shape, SquarePulse) else 0.0
        return ScaledParams(hbar=h, k=self.k, duty=duty), shape


@dataclass
class ScanResult:
    hbar: np.ndarray
    period: np.ndarray  # s
    energy: np.ndarray  # ensemble mean E/E_r after n_kicks
    stderr: np.ndarray
    traces: np.ndarray | None = None  # ensemble mean E/E_r after each kick, per point
    metadata: dict = field(default_factory=dict)

    @property
    def hbar_over_pi(self) -> np.ndarray:
        return self.hbar / np.pi

    def __len__(self):
        return len(self.hbar)

    def step(self) -> float:
        if len(self.hbar) < 2:
            raise InsufficientResolution("a scan needs at least two points to define a step")
        return float(np.median(np.diff(self.hbar)))


# worker-side ensemble, installed once per process
_ENSEMBLE: Ensemble | None = None


def _install(ensemble: Ensemble) -> None:
    global _ENSEMBLE
    _ENSEMBLE = ensemble


def _run_point(config: ScanConfig, i: int, ensemble: Ensemble | None = None):
    ensemble = ensemble or _ENSEMBLE
    params, shape = config.point(i)
    try:
        traces = [evolve(s, params, shape, config.n_kicks)[1] for s in ensemble.states]
    except MomentumCutoffError as err:
        return i, None, err
    return i, np.array(traces), None


def _reduce(weights: np.ndarray, traces: np.ndarray) -> tuple[np.ndarray, float]:
    mean = weights @ traces
    final = traces[:, -1]
    spread = float(np.sqrt(np.sum(weights**2 * (final - mean[-1]) ** 2)))
    return mean, spread


def default_workers() -> int:
    return os.cpu_count() or 1


def run_scan(config: ScanConfig, workers: int = 1) -> ScanResult:
    """Evolve every ensemble member at every sweep point.

    Reduction happens in index order after all jobs finish, so the result does
    not depend on ``workers``.
    """
    ensemble = build_ensemble(config.state, config.grid, config.geometry)
    n = len(config.hbar)
    outcomes = [None] * n
    if workers <= 1 or n <= 1:
        for i in range(n):
            outcomes[i] = _run_point(config, i, ensemble)
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_install,
                                 initargs=(ensemble,)) as pool:
            chunk = max(1, n // (4 * workers))
            for out in pool.map(_run_point, [config] * n, range(n), chunksize=chunk):
                outcomes[out[0]] = out

    failures = {i: err for i, _, err in outcomes if err is not None}
    hbar = np.asarray(config.hbar)
    if failures:
        raise ScanError(failures, hbar)

    weights = ensemble.weights
    traces = np.empty((n, config.n_kicks + 1))
    stderr = np.empty(n)
    for i, member_traces, _ in outcomes:
        traces[i], stderr[i] = _reduce(weights, member_traces)
    return ScanResult(
        hbar=hbar,
        period=config.periods(),
        energy=traces[:, -1].copy(),
        stderr=stderr,
        traces=traces,
        metadata={
            "k": config.k,
            "n_kicks": config.n_kicks,
            "mode": config.mode,
            "shape": type(config.shape).__name__,
            "duty": getattr(config.shape, "duty", 0.0),
            "members": len(ensemble),
            "seed": getattr(config.state, "seed", None),
            "grid": {"periods": config.grid.periods,
                     "points_per_period": config.grid.points_per_period},
        },
    )


@dataclass(frozen=True)
class Peak:
    index: int
    hbar: float
    energy: float
    height: float
    label: Fraction | None  # hbar ~ label * 4 pi

    @property
    def hbar_over_pi(self) -> float:
        return self.hbar / np.pi


@dataclass
class PeakReport:
    peaks: list[Peak]
    threshold: float
    step: float
    max_denominator: int

    def __len__(self):
        return len(self.peaks)

    def positions(self) -> np.ndarray:
        return np.array([p.hbar for p in self.peaks])

    def labels(self) -> list[Fraction | None]:
        return [p.label for p in self.peaks]

    def near(self, hbar: float, tol: float | None = None) -> Peak | None:
        """Detected peak closest to ``hbar`` if within ``tol`` (default one step)."""
        tol = self.step if tol is None else tol
        best = min(self.peaks, key=lambda p: abs(p.hbar - hbar), default=None)
        if best is None or abs(best.hbar - hbar) > tol * (1 + 1e-6):
            return None
        return best


def label_resonance(hbar: float, max_denominator: int, tol: float) -> Fraction | None:
    """Lowest-order rational r/s with |hbar - (r/s) 4 pi| <= tol, or None."""
    x = hbar / (4 * np.pi)
    slack = tol / (4 * np.pi) * (1 + 1e-6)
    for s in range(1, max_denominator + 1):
        r = round(x * s)
        if r >= 1 and abs(x - r / s) <= slack:
            return Fraction(r, s)
    return None


def nearest_order(hbar: float, denominator: int) -> int:
    """Numerator r of the r/denominator * 4 pi resonance closest to ``hbar``."""
    return int(round(hbar / (4 * np.pi) * denominator))


def peak_height(energy: np.ndarray, i: int, left: int = 0, right: int | None = None) -> float:
    """Energy at ``i`` over the higher of the two flanking minima.

    The minima are taken over ``energy[left:i+1]`` and ``energy[i:right+1]``.
    """
    right = len(energy) - 1 if right is None else right
    base = max(energy[left:i + 1].min(), energy[i:right + 1].min())
    return float(max(energy[i] - base, 0.0))


def point_noise(energy: np.ndarray) -> float:
    """Robust point-to-point scatter of a scan.

    Scaled MAD of the first differences over sqrt(2); a smooth trend only
    shifts the differences, so it does not inflate or hide the estimate.
    """
    d = np.diff(np.asarray(energy, dtype=float))
    return float(1.4826 * np.median(np.abs(d - np.median(d))) / np.sqrt(2))


def detect_peaks(result: ScanResult, max_denominator: int = 16, threshold: float | None = None,
                 label_tol: float | None = None) -> PeakReport:
    """Local maxima whose prominence clears ``threshold``.

    The default threshold is three times :func:`point_noise`.  Heights are measured from
    the higher of the two minima separating a peak from its detected
    neighbours (or the scan edge).
    """
    if len(result) < 3:
        raise InsufficientResolution("peak detection needs at least three sweep points")
    h = np.asarray(result.hbar)
    steps = np.diff(h)
    step = float(np.median(steps))
    if np.any(np.abs(steps - step) > 1e-6 * step):
        raise InsufficientResolution("peak detection needs a uniformly spaced sweep")
    # two neighbouring resonances of order <= s_max are at least 4 pi / s_max^2 apart;
    # require three samples across that width
    finest = 4 * np.pi / max_denominator**2
    if step > finest * (1 + 1e-9):
        raise InsufficientResolution(
            f"sweep step {step / np.pi:.4g} pi is too coarse for resonances of order "
            f"<= {max_denominator}; need <= {finest / np.pi:.4g} pi")
    energy = np.asarray(result.energy, dtype=float)
    if threshold is None:
        threshold = max(3 * point_noise(energy), 1e-9 * float(np.abs(energy).max()))
    label_tol = step if label_tol is None else label_tol

    idx, _ = find_peaks(energy, prominence=threshold)
    edges = [0, *idx.tolist(), len(energy) - 1]
    peaks = []
    for j, i in enumerate(idx):
        peaks.append(Peak(
            index=int(i),
            hbar=float(h[i]),
            energy=float(energy[i]),
            height=peak_height(energy, i, edges[j], edges[j + 2]),
            label=label_resonance(h[i], max_denominator, label_tol),
        ))
    return PeakReport(peaks, float(threshold), step, max_denominator)


def local_sweep(center: float, half_width: float, step: float) -> np.ndarray:
    count = int(round(half_width / step))
    return center + step * np.arange(-count, count + 1)


def peak_vs_kicks(config: ScanConfig, hbar_target: float, n_list: Sequence[int],
                  half_width: float = 0.04 * np.pi, step: float = 0.01 * np.pi,
                  search: int = 2, workers: int = 1) -> list[tuple[int, float]]:
    """Baseline-subtracted height of the resonance at ``hbar_target`` after each n in ``n_list``.

    One local scan to max(n_list) kicks is run; the per-kick ensemble energies
    give the curve at every intermediate n.  The peak is the largest energy
    within ``search`` steps of the target.
    """
    n_list = list(n_list)
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing")
    if not n_list:
        return []
    local = replace(config, hbar=tuple(local_sweep(hbar_target, half_width, step)),
                    n_kicks=max(n_list))
    result = run_scan(local, workers=workers)
    c = len(result) // 2
    out = []
    for n in n_list:
        curve = result.traces[:, n]
        window = slice(max(0, c - search), c + search + 1)
        i = window.start + int(np.argmax(curve[window]))
        out.append((n, peak_height(curve, i)))
    return out
