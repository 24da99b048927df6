"""Quantum diffusion background and the classical standard map."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.ndimage import uniform_filter1d

MAX_ORDER = 16
MAX_ARGUMENT = 50.0
_RESCALE = 1e250


def _start_order(n: int, x: float) -> int:
    top = max(n, x)
    start = int(top + 20 + 4 * math.sqrt(top + 1))
    return start + (start % 2)  # even, so the normalisation sum lines up


def bessel_j(n: int, x):
    """Bessel function J_n(x) of the first kind for 0 <= n <= 16, 0 <= x <= 50.

    Miller's downward recurrence J_{m-1} = (2m/x) J_m - J_{m+1}, normalised
    with J_0 + 2 sum_k J_{2k} = 1.  Accepts a scalar or an array of arguments.
    """
    if int(n) != n or not 0 <= n <= MAX_ORDER:
        raise ValueError(f"order must be an integer in [0, {MAX_ORDER}], got {n!r}")
    xs = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xs)) or np.any(xs < 0) or np.any(xs > MAX_ARGUMENT):
        raise ValueError(f"argument must lie in [0, {MAX_ARGUMENT}]")
    n = int(n)
    flat = xs.ravel()
    out = np.zeros_like(flat)
    out[flat == 0] = 1.0 if n == 0 else 0.0
    pos = flat > 0
    if np.any(pos):
        out[pos] = _miller(n, flat[pos])
    out = out.reshape(xs.shape)
    return float(out) if out.ndim == 0 else out


def _miller(n: int, x: np.ndarray) -> np.ndarray:
    top = _start_order(n, float(x.max()))
    j_next = np.zeros_like(x)
    j_cur = np.full_like(x, 1e-300)
    norm = np.zeros_like(x)
    result = np.zeros_like(x)
    for m in range(top, 0, -1):
        j_prev = 2 * m / x * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds J_{m-1}
        if m - 1 == n:
            result = j_cur.copy()
        if (m - 1) % 2 == 0 and m - 1 > 0:
            norm += 2 * j_cur
        big = np.abs(j_cur) > _RESCALE
        if np.any(big):
            scale = np.where(big, 1 / _RESCALE, 1.0)
            j_cur *= scale
            j_next *= scale
            norm *= scale
            result *= scale
    norm += j_cur  # J_0
    return result / norm


@dataclass(frozen=True)
class DiffusionModel:
    k: float
    hbar: float
    d: float
    bracket: float
    D: float
    energy_per_kick: float  # E_r per kick, 8 D / hbar^2


def _signed_bessel(n: int, d):
    # J_n(-x) = (-1)^n J_n(x)
    d = np.asarray(d, dtype=float)
    return np.where(d < 0, (-1) ** n, 1) * bessel_j(n, np.abs(d))


def diffusion(k, hbar) -> DiffusionModel:
    """Off-resonant quantum diffusion rate with Bessel corrections.

    ``D`` is the growth of p~^2/2 per kick in scaled units; converting through
    E = m/(4 k_L^2 T^2) D gives ``energy_per_kick`` = 8 D / hbar^2 recoils.
    Scalars or broadcastable arrays are accepted.
    """
    k = np.asarray(k, dtype=float)
    hbar = np.asarray(hbar, dtype=float)
    if np.any(k <= 0) or np.any(hbar <= 0):
        raise ValueError("k and hbar must be positive")
    d = 2 * k * np.sin(hbar / 2)
    j1, j2, j3 = (_signed_bessel(n, d) for n in (1, 2, 3))
    bracket = 0.5 - j2 - j1**2 + j2**2 + j3**2
    big_d = k**2 * hbar**2 / 2 * bracket
    per_kick = 8 * big_d / hbar**2

    def out(a):
        a = np.asarray(a)
        return float(a) if a.ndim == 0 else a

    return DiffusionModel(out(k), out(hbar), out(d), out(bracket), out(big_d), out(per_kick))


def classical_resonance(order: int = 1) -> float:
    """Stochasticity at which the order-``order`` classical resonance sits."""
    return math.sqrt((order * 2 * math.pi) ** 2 + 16)


@dataclass(frozen=True)
class ClassicalEnsemble:
    theta: np.ndarray
    p: np.ndarray
    kappa: float
    kicks: int = 0

    def energy(self) -> float:
        return float(np.mean(self.p**2) / 2)


def classical_ensemble(particles: int, kappa: float, seed: int,
                       momentum_width: float = 0.0) -> ClassicalEnsemble:
    """Uniform angles, Gaussian scaled momenta of rms ``momentum_width``."""
    if particles < 1:
        raise ValueError("need at least one particle")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2 * np.pi, particles)
    p = rng.normal(0.0, momentum_width, particles) if momentum_width > 0 else np.zeros(particles)
    return ClassicalEnsemble(theta, p, kappa)


def classical_step(e: ClassicalEnsemble) -> ClassicalEnsemble:
    """One standard-map kick: p' = p + kappa sin(theta), theta' = theta + p'."""
    p = e.p + e.kappa * np.sin(e.theta)
    theta = np.mod(e.theta + p, 2 * np.pi)
    return replace(e, theta=theta, p=p, kicks=e.kicks + 1)


@dataclass(frozen=True)
class ClassicalCurve:
    kappa: np.ndarray
    energy: np.ndarray  # mean energy gained over the kicks, scaled units
    stderr: np.ndarray
    n_kicks: int
    particles: int
    seed: int

    def quasilinear(self) -> np.ndarray:
        return self.kappa**2 / 4 * self.n_kicks


def classical_scan(kappas, n_kicks: int, particles: int, seed: int,
                   momentum_width: float = 0.0) -> ClassicalCurve:
    """Mean energy gain after ``n_kicks`` for each stochasticity value.

    Every kappa starts from the same seeded ensemble.
    """
    kappas = np.asarray(kappas, dtype=float)
    base = classical_ensemble(particles, 0.0, seed, momentum_width)
    e0 = base.p**2 / 2
    energy = np.empty(kappas.size)
    stderr = np.empty(kappas.size)
    for i, kappa in enumerate(kappas):
        e = replace(base, kappa=float(kappa))
        for _ in range(n_kicks):
            e = classical_step(e)
        gain = e.p**2 / 2 - e0
        energy[i] = gain.mean()
        stderr[i] = gain.std(ddof=1) / math.sqrt(particles) if particles > 1 else 0.0
    return ClassicalCurve(kappas, energy, stderr, n_kicks, particles, seed)


def enhancement_peak(curve: ClassicalCurve, smoothing: float = 0.3) -> float:
    """Stochasticity of maximal energy gain after a running mean over ``smoothing``."""
    step = np.diff(curve.kappa)
    width = max(1, int(round(smoothing / step.mean()))) if step.size else 1
    smooth = uniform_filter1d(curve.energy, width | 1, mode="nearest")
    return float(curve.kappa[int(np.argmax(smooth))])
