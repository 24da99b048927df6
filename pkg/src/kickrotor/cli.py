"""Command-line driver: ``kickrotor <command> --config FILE [--out PATH] [--seed N] [--workers N]``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analytics, output
from .config import COMMANDS, ConfigError, RunConfig, bundled_configs, load_config
from .propagator import MomentumCutoffError, evolve
from .scan import ScanConfig, ScanError, default_workers, detect_peaks, peak_vs_kicks, run_scan
from .states import ThermalMixture, build_ensemble
from .units import period_from_hbar

log = logging.getLogger("kickrotor")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


def scan_config(rc: RunConfig) -> ScanConfig:
    return ScanConfig(
        hbar=tuple(rc.sweep.hbar_values(rc.geometry)), n_kicks=rc.n_kicks, k=rc.k, shape=rc.shape,
        state=rc.state, grid=rc.grid, geometry=rc.geometry, mode=rc.mode, pulse_width=rc.pulse_width,
    )


def metadata(rc: RunConfig) -> dict:
    return {
        "command": rc.command,
        "config": rc.raw,
        "seed": rc.seed,
        "grid": {"periods": rc.grid.periods, "points_per_period": rc.grid.points_per_period},
    }


def _plot(enabled: bool, fn, *args, **kw):
    if enabled:
        from . import plotting
        path = getattr(plotting, fn)(*args, **kw)
        log.info("wrote %s", path)


def cmd_scan(rc: RunConfig, out: Path, workers: int, plot: bool) -> None:
    result = run_scan(scan_config(rc), workers=workers)
    output.emit_csv(result, out, metadata(rc))
    log.info("wrote %s (%d points)", out, len(result))
    from .plotting import figure_path
    _plot(plot, "plot_scan", result, figure_path(out), title=out.stem)


def cmd_peaks(rc: RunConfig, out: Path, workers: int, plot: bool) -> None:
    config = scan_config(rc)
    result = run_scan(config, workers=workers)
    report = detect_peaks(result, rc.max_denominator)
    meta = metadata(rc) | {"threshold": report.threshold, "max_denominator": report.max_denominator}
    scan_out = out.with_name(out.stem + "_scan.csv")
    output.emit_csv(result, scan_out, metadata(rc))
    output.write_table(out, output.PEAK_COLUMNS,
                       output.peak_rows(report, lambda h: period_from_hbar(h, rc.geometry)), meta)
    for p in report.peaks:
        label = f"{p.label.numerator}/{p.label.denominator}" if p.label else "-"
        log.info("peak at hbar/pi=%.4f  height=%.4g E_r  label %s x 4pi", p.hbar_over_pi, p.height, label)
    from .plotting import figure_path
    _plot(plot, "plot_scan", result, figure_path(out), peaks=report, title=out.stem)
    if rc.peak_kicks:
        if rc.peak_hbar is None and not report.peaks:
            log.warning("no peak detected and no peak_hbar_over_pi given; skipping peak growth")
            return
        target = rc.peak_hbar if rc.peak_hbar is not None else max(report.peaks, key=lambda p: p.height).hbar
        growth = peak_vs_kicks(config, target, rc.peak_kicks, step=report.step, workers=workers)
        growth_out = out.with_name(out.stem + "_growth.csv")
        output.write_table(growth_out, output.GROWTH_COLUMNS, growth,
                           metadata(rc) | {"hbar_over_pi": target / np.pi})
        _plot(plot, "plot_growth", growth, figure_path(growth_out),
              title=f"hbar/pi = {target / np.pi:.4g}")


def cmd_evolve(rc: RunConfig, out: Path, workers: int, plot: bool) -> None:
    from .propagator import DeltaKick, SquarePulse
    from .units import ScaledParams
    duty = rc.shape.duty if isinstance(rc.shape, SquarePulse) else 0.0
    params = ScaledParams(rc.hbar, rc.k, duty)
    ensemble = build_ensemble(rc.state, rc.grid, rc.geometry)
    trace = sum(w * evolve(s, params, rc.shape, rc.n_kicks)[1] for w, s in ensemble.members)
    output.write_table(out, output.TRACE_COLUMNS, list(enumerate(trace)),
                       metadata(rc) | {"hbar": rc.hbar, "k": rc.k, "duty": duty})
    log.info("E/E_r after %d kicks: %.6g", rc.n_kicks, trace[-1])
    from .plotting import figure_path
    _plot(plot, "plot_trace", trace, figure_path(out), title=f"hbar/pi={rc.hbar / np.pi:.4g}, k={rc.k:g}")


def cmd_diffusion(rc: RunConfig, out: Path, workers: int, plot: bool) -> None:
    hbar = rc.sweep.hbar_values(rc.geometry)
    model = analytics.diffusion(rc.k, hbar)
    output.write_table(out, output.DIFFUSION_COLUMNS, output.diffusion_rows(model),
                       metadata(rc) | {"k": rc.k})
    from .plotting import figure_path
    _plot(plot, "plot_diffusion", model, figure_path(out))


def cmd_classical(rc: RunConfig, out: Path, workers: int, plot: bool) -> None:
    start, stop, step = rc.kappa
    kappas = step * (round(start / step) + np.arange(int(np.floor((stop - start) / step + 1e-9)) + 1))
    curve = analytics.classical_scan(kappas, rc.n_kicks, rc.particles, rc.seed, rc.momentum_width)
    peak = analytics.enhancement_peak(curve)
    output.write_table(out, output.CLASSICAL_COLUMNS, output.classical_rows(curve),
                       metadata(rc) | {"enhancement_peak": peak,
                                       "resonance_condition": analytics.classical_resonance(1)})
    log.info("largest energy gain at kappa=%.3f (resonance condition %.3f)", peak,
             analytics.classical_resonance(1))
    from .plotting import figure_path
    _plot(plot, "plot_classical", curve, figure_path(out))


HANDLERS = {
    "scan": cmd_scan, "peaks": cmd_peaks, "evolve": cmd_evolve,
    "diffusion": cmd_diffusion, "classical": cmd_classical,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickrotor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True,
                       help="config file, or a bundled config: " + ", ".join(bundled_configs()))
        p.add_argument("--out", type=Path, default=None, help="output CSV (default: <command>.csv)")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None,
                       help="parallel worker processes (default: available CPUs)")
        p.add_argument("--no-plot", dest="plot", action="store_false", help="skip the PNG figure")
        p.add_argument("-q", "--quiet", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(name)s: %(message)s")
    overrides = {"seed": args.seed} if args.seed is not None else {}
    try:
        rc = load_config(args.config, args.command, overrides)
    except ConfigError as err:
        print(err, file=sys.stderr)
        return EXIT_CONFIG
    if args.workers is not None and args.workers < 1:
        print("--workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    workers = args.workers or rc.workers or default_workers()
    out = args.out or Path(f"{args.command}.csv")
    try:
        HANDLERS[args.command](rc, out, workers, args.plot)
    except (MomentumCutoffError, ScanError) as err:
        print(f"numerical guard tripped: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as err:
        print(err, file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
