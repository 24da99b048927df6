"""CSV emission with a JSON metadata sidecar."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .analytics import ClassicalCurve, DiffusionModel
from .scan import PeakReport, ScanResult

SCAN_COLUMNS = ("T_us", "hbar_over_pi", "energy_recoils", "stderr_recoils")
PEAK_COLUMNS = ("T_us", "hbar_over_pi", "energy_recoils", "height_recoils", "label_r", "label_s")
DIFFUSION_COLUMNS = ("hbar_over_pi", "d", "bracket", "D", "energy_per_kick_recoils")
CLASSICAL_COLUMNS = ("kappa", "energy_gain", "stderr", "quasilinear")
TRACE_COLUMNS = ("kick", "energy_recoils")
GROWTH_COLUMNS = ("kicks", "height_recoils")


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return ""
    return f"{float(x):.12g}"


def code_version() -> str:
    from . import __version__
    return __version__


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.stem + ".meta.json")


def scan_rows(result: ScanResult):
    return [(t * 1e6, h, e, s) for t, h, e, s in
            zip(result.period, result.hbar_over_pi, result.energy, result.stderr)]


def peak_rows(report: PeakReport, period_of):
    rows = []
    for p in report.peaks:
        r, s = (p.label.numerator, p.label.denominator) if p.label is not None else (None, None)
        rows.append((period_of(p.hbar) * 1e6, p.hbar_over_pi, p.energy, p.height, r, s))
    return rows


def diffusion_rows(model: DiffusionModel):
    cols = [np.atleast_1d(a) for a in (model.hbar, model.d, model.bracket, model.D, model.energy_per_kick)]
    cols[0] = cols[0] / np.pi
    return list(zip(*cols))


def classical_rows(curve: ClassicalCurve):
    return list(zip(curve.kappa, curve.energy, curve.stderr, curve.quasilinear()))


def write_table(path, columns, rows, metadata: dict | None = None) -> Path:
    """Write ``rows`` under a header line, plus ``<stem>.meta.json`` when metadata is given."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([fmt(x) for x in row])
        if metadata is not None:
            meta = {"columns": list(columns), "code_version": code_version(), **metadata}
            sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True, default=_jsonable) + "\n")
    except OSError as err:
        raise OSError(f"cannot write {path}: {err.strerror or err}") from err
    return path


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    return str(x)


def emit_csv(result: ScanResult, path, metadata: dict | None = None) -> Path:
    meta = dict(result.metadata)
    meta.update(metadata or {})
    return write_table(path, SCAN_COLUMNS, scan_rows(result), meta)


def read_csv(path) -> tuple[list[str], np.ndarray]:
    """Header and numeric body of a table written by :func:`write_table` (blank -> nan)."""
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = [[float(x) if x else np.nan for x in row] for row in reader]
    return header, np.array(body, dtype=float).reshape(len(body), len(header))


def read_scan(path) -> ScanResult:
    header, data = read_csv(path)
    if tuple(header) != SCAN_COLUMNS:
        raise ValueError(f"{path} is not a scan table (columns {header})")
    meta_file = sidecar_path(Path(path))
    meta = json.loads(meta_file.read_text()) if meta_file.exists() else {}
    return ScanResult(hbar=data[:, 1] * np.pi, period=data[:, 0] * 1e-6,
                      energy=data[:, 2], stderr=data[:, 3], metadata=meta)
