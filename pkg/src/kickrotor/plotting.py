"""Figure rendering for the report path; every plot goes straight to a file."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .analytics import ClassicalCurve, DiffusionModel, classical_resonance  # noqa: E402
from .scan import PeakReport, ScanResult  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "figure.dpi": 120,
    "savefig.bbox": "tight",
}


def figure_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".png")


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path)
    plt.close(fig)
    return path


def _period_axis(ax, result: ScanResult):
    top = ax.twiny()
    top.set_xlim(*(x * 1e6 for x in (result.period[0], result.period[-1])))
    top.set_xlabel(r"$T$ ($\mu$s)")


def plot_scan(result: ScanResult, path, peaks: PeakReport | None = None, title: str | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 3.6))
        ax.plot(result.hbar_over_pi, result.energy, color="k", lw=1)
        if result.stderr.any():
            ax.fill_between(result.hbar_over_pi, result.energy - result.stderr,
                            result.energy + result.stderr, color="0.7", lw=0)
        if peaks is not None:
            for p in peaks.peaks:
                ax.plot(p.hbar_over_pi, p.energy, "v", color="C3", ms=5)
                if p.label is not None:
                    ax.annotate(f"{p.label.numerator}/{p.label.denominator}", (p.hbar_over_pi, p.energy),
                                textcoords="offset points", xytext=(0, 6), ha="center", fontsize=7)
        ax.set_xlim(result.hbar_over_pi[0], result.hbar_over_pi[-1])
        ax.set_xlabel(r"$\tilde\hbar/\pi$")
        ax.set_ylabel(r"$E/E_r$")
        _period_axis(ax, result)
        if title:
            ax.set_title(title, fontsize=9, pad=28)
        return _save(fig, path)


def plot_trace(energies, path, title: str | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.plot(range(len(energies)), energies, "o-", ms=3, color="k")
        ax.set_xlabel("kick number")
        ax.set_ylabel(r"$E/E_r$")
        if title:
            ax.set_title(title, fontsize=9)
        return _save(fig, path)


def plot_growth(pairs, path, title: str | None = None) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        n, h = zip(*pairs) if pairs else ((), ())
        ax.plot(n, h, "o", color="k")
        ax.set_xlabel("kick number")
        ax.set_ylabel(r"peak height ($E_r$)")
        if title:
            ax.set_title(title, fontsize=9)
        return _save(fig, path)


def plot_diffusion(model: DiffusionModel, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.plot(model.hbar / 3.141592653589793, model.energy_per_kick, color="k")
        ax.set_xlabel(r"$\tilde\hbar/\pi$")
        ax.set_ylabel(r"$\Delta E$ per kick ($E_r$)")
        ax.set_title(f"k = {float(model.k.flat[0]) if hasattr(model.k, 'flat') else model.k:g}", fontsize=9)
        return _save(fig, path)


def plot_classical(curve: ClassicalCurve, path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.errorbar(curve.kappa, curve.energy, yerr=curve.stderr, color="k", lw=1, elinewidth=0.5)
        ax.plot(curve.kappa, curve.quasilinear(), ls="--", color="0.5", label="quasilinear")
        ax.axvline(classical_resonance(1), color="C3", lw=0.8, label=r"$\sqrt{(2\pi)^2+16}$")
        ax.set_xlabel(r"$\kappa$")
        ax.set_ylabel(f"energy gain after {curve.n_kicks} kicks")
        ax.legend()
        return _save(fig, path)
