"""Run configuration: flat ``key = value`` text, optionally grouped in ``[sections]``.

Section names are organisational only; every key must be unique across the
document.  Validation collects every problem before raising.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Union

import numpy as np

from .propagator import DeltaKick, MomentumGrid, PulseShape, SquarePulse
from .states import Comb, Gaussian, InitialStateSpec, PlaneWave, ThermalMixture
from .units import (
    DEFAULT_ANGLE, DEFAULT_WAVELENGTH, RB85_MASS, LatticeGeometry, depth_from_intensity,
    geometry_from_optics, kick_strength, period_from_hbar, scaled_hbar,
)

COMMANDS = ("scan", "evolve", "peaks", "diffusion", "classical")

SCALED_KEYS = {"hbar_eff", "hbar_over_pi", "k"}
PHYSICAL_KEYS = {"period_us", "pulse_us", "depth_recoils", "intensity_mw_cm2", "detuning_ghz",
                 "linewidth_mhz", "saturation_mw_cm2"}

# key -> converter
KEYS: dict[str, Any] = {
    "command": str, "seed": int, "workers": int,
    "hbar_eff": float, "hbar_over_pi": float, "k": float, "duty": float,
    "wavelength_nm": float, "angle_deg": float, "mass_kg": float,
    "period_us": float, "pulse_us": float, "depth_recoils": float,
    "intensity_mw_cm2": float, "detuning_ghz": float, "linewidth_mhz": float,
    "saturation_mw_cm2": float,
    "kicks": int, "pulse": str, "substeps": int, "mode": str,
    "state": str, "beta": float, "width_um": float, "center_um": float,
    "envelope_um": float, "spacing_um": float, "members": int,
    "band_velocities_mm_s": "floats", "band_weights": "floats",
    "sweep_axis": str, "sweep_start": float, "sweep_stop": float, "sweep_step": float,
    "max_denominator": int, "peak_kicks": "ints", "peak_hbar_over_pi": float,
    "periods": int, "points_per_period": int,
    "kappa_start": float, "kappa_stop": float, "kappa_step": float,
    "particles": int, "momentum_width": float,
}

STATES = ("plane_wave", "gaussian", "comb", "thermal")


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        self.problems = list(problems)
        super().__init__("invalid configuration:\n  " + "\n  ".join(self.problems))


@dataclass(frozen=True)
class Sweep:
    axis: str  # "hbar_over_pi" or "period_us"
    start: float
    stop: float
    step: float

    def hbar_values(self, geometry: LatticeGeometry) -> np.ndarray:
        from .scan import hbar_sweep
        if self.axis == "hbar_over_pi":
            return hbar_sweep(self.start, self.stop, self.step)
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        periods = (self.start + self.step * np.arange(count)) * 1e-6
        return np.array([scaled_hbar(t, geometry) for t in periods])


@dataclass
class RunConfig:
    command: str
    geometry: LatticeGeometry
    k: float
    hbar: float | None
    shape: PulseShape
    mode: str
    pulse_width: float | None
    n_kicks: int
    state: Union[InitialStateSpec, ThermalMixture, None]
    grid: MomentumGrid
    sweep: Sweep | None
    seed: int | None
    workers: int | None
    max_denominator: int = 16
    peak_kicks: tuple[int, ...] = ()
    peak_hbar: float | None = None
    kappa: tuple[float, float, float] = (4.0, 10.0, 0.05)
    particles: int = 10_000
    momentum_width: float = 0.0
    raw: dict = field(default_factory=dict)


def _read(text: str) -> tuple[dict[str, str], list[str]]:
    parser = configparser.ConfigParser(interpolation=None, delimiters=("=", ":"),
                                       comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    parser.optionxform = str
    problems = []
    try:
        parser.read_string("[__top__]\n" + text)
    except configparser.Error as err:
        return {}, [f"cannot parse config: {err}".replace("[__top__]\n", "")]
    flat: dict[str, str] = {}
    for section in parser.sections():
        for key, value in parser.items(section):
            if key in flat:
                problems.append(f"duplicate key {key!r}")
            flat[key] = value.strip().strip("\"'")
    return flat, problems


def _convert(flat: dict[str, str]) -> tuple[dict[str, Any], list[str]]:
    values, problems = {}, []
    for key, raw in flat.items():
        kind = KEYS.get(key)
        if kind is None:
            problems.append(f"unknown key {key!r}")
            continue
        try:
            if kind == "floats":
                values[key] = tuple(float(v) for v in raw.replace(",", " ").split())
            elif kind == "ints":
                values[key] = tuple(int(v) for v in raw.replace(",", " ").split())
            else:
                values[key] = kind(raw)
        except ValueError:
            problems.append(f"{key}: cannot read {raw!r} as {getattr(kind, '__name__', kind)}")
    return values, problems


def parse_config(text: str, command: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Validate ``text``; raise :class:`ConfigError` listing every violation.

    ``overrides`` (e.g. a seed given on the command line) replace keys of the
    document before validation.
    """
    flat, problems = _read(text)
    flat.update({key: str(value) for key, value in (overrides or {}).items()})
    v, conv = _convert(flat)
    problems += conv

    cmd = v.get("command", command)
    if command is not None and "command" in v and v["command"] != command:
        problems.append(f"config is for command {v['command']!r}, not {command!r}")
        cmd = command
    if cmd is None:
        problems.append("missing key 'command'")
    elif cmd not in COMMANDS:
        problems.append(f"command must be one of {', '.join(COMMANDS)}, got {cmd!r}")

    scaled = SCALED_KEYS & v.keys()
    physical = PHYSICAL_KEYS & v.keys()
    if scaled and physical:
        problems.append("give either scaled parameters (" + ", ".join(sorted(scaled))
                        + ") or physical ones (" + ", ".join(sorted(physical)) + "), not both")
    if "hbar_eff" in v and "hbar_over_pi" in v:
        problems.append("give hbar_eff or hbar_over_pi, not both")

    try:
        geometry = geometry_from_optics(v.get("wavelength_nm", DEFAULT_WAVELENGTH * 1e9) * 1e-9,
                                        math.radians(v.get("angle_deg", math.degrees(DEFAULT_ANGLE))),
                                        v.get("mass_kg", RB85_MASS))
    except ValueError as err:
        problems.append(str(err))
        geometry = geometry_from_optics(DEFAULT_WAVELENGTH, DEFAULT_ANGLE)

    sweep = _sweep(v, problems)
    k, hbar, duty, pulse_width = _dynamics(v, physical, geometry, sweep, cmd, problems)

    shape: PulseShape = DeltaKick()
    pulse = v.get("pulse", "delta")
    mode = v.get("mode", "fixed-hardware" if physical and pulse == "square" else "fixed-k")
    if pulse == "square":
        if duty is None:
            problems.append("square pulses need 'duty' (scaled) or 'pulse_us' (physical)")
        else:
            try:
                shape = SquarePulse(duty, v.get("substeps", 16))
            except ValueError as err:
                problems.append(str(err))
    elif pulse != "delta":
        problems.append(f"pulse must be 'delta' or 'square', got {pulse!r}")
    if mode not in ("fixed-k", "fixed-hardware"):
        problems.append(f"mode must be 'fixed-k' or 'fixed-hardware', got {mode!r}")

    n_kicks = v.get("kicks", 16)
    if n_kicks < 0:
        problems.append("kicks must be >= 0")

    state = _state(v, cmd, problems)
    if isinstance(state, ThermalMixture) and "seed" not in v:
        problems.append("thermal ensembles need a 'seed'")
    if cmd == "classical" and "seed" not in v:
        problems.append("classical ensembles need a 'seed'")

    try:
        grid = MomentumGrid(v.get("periods", 1 if isinstance(state, PlaneWave) else 64),
                            v.get("points_per_period", 128))
    except ValueError as err:
        problems.append(str(err))
        grid = MomentumGrid()

    if cmd in ("scan", "peaks", "diffusion") and sweep is None:
        problems.append(f"command {cmd!r} needs sweep_start, sweep_stop and sweep_step")
    if cmd == "evolve" and hbar is None:
        problems.append("command 'evolve' needs hbar_eff, hbar_over_pi or period_us")
    if "workers" in v and v["workers"] < 1:
        problems.append("workers must be >= 1")

    kappa = (v.get("kappa_start", 4.0), v.get("kappa_stop", 10.0), v.get("kappa_step", 0.05))
    if kappa[2] <= 0 or kappa[1] < kappa[0]:
        problems.append("kappa sweep needs kappa_step > 0 and kappa_stop >= kappa_start")
    if v.get("particles", 1) < 1:
        problems.append("particles must be >= 1")

    if problems:
        raise ConfigError(problems)
    return RunConfig(
        command=cmd, geometry=geometry, k=k, hbar=hbar, shape=shape, mode=mode,
        pulse_width=pulse_width, n_kicks=n_kicks, state=state, grid=grid, sweep=sweep,
        seed=v.get("seed"), workers=v.get("workers"),
        max_denominator=v.get("max_denominator", 16),
        peak_kicks=v.get("peak_kicks", ()),
        peak_hbar=v["peak_hbar_over_pi"] * math.pi if "peak_hbar_over_pi" in v else None,
        kappa=kappa, particles=v.get("particles", 10_000),
        momentum_width=v.get("momentum_width", 0.0), raw=dict(flat),
    )


def _sweep(v: dict, problems: list[str]) -> Sweep | None:
    keys = ("sweep_start", "sweep_stop", "sweep_step")
    present = [key for key in keys if key in v]
    if not present:
        return None
    if len(present) != 3:
        problems.append("sweep needs all of sweep_start, sweep_stop, sweep_step")
        return None
    axis = v.get("sweep_axis", "hbar_over_pi")
    if axis not in ("hbar_over_pi", "period_us"):
        problems.append(f"sweep_axis must be 'hbar_over_pi' or 'period_us', got {axis!r}")
        return None
    if v["sweep_step"] <= 0 or v["sweep_stop"] <= v["sweep_start"] or v["sweep_start"] <= 0:
        problems.append("sweep needs 0 < sweep_start < sweep_stop and sweep_step > 0")
        return None
    return Sweep(axis, v["sweep_start"], v["sweep_stop"], v["sweep_step"])


def _dynamics(v, physical, geometry, sweep, cmd, problems):
    hbar = None
    if "hbar_eff" in v:
        hbar = v["hbar_eff"]
    elif "hbar_over_pi" in v:
        hbar = v["hbar_over_pi"] * math.pi
    duty = v.get("duty")
    pulse_width = None

    if physical:
        if "depth_recoils" in v:
            depth = v["depth_recoils"] * geometry.recoil_energy
        elif {"intensity_mw_cm2", "detuning_ghz", "linewidth_mhz", "saturation_mw_cm2"} <= v.keys():
            try:
                depth = depth_from_intensity(v["intensity_mw_cm2"], 2 * math.pi * v["detuning_ghz"] * 1e9,
                                             2 * math.pi * v["linewidth_mhz"] * 1e6,
                                             v["saturation_mw_cm2"])
            except ValueError as err:
                problems.append(str(err))
                depth = None
        else:
            problems.append("physical parameters need depth_recoils or the full optical set "
                            "(intensity_mw_cm2, detuning_ghz, linewidth_mhz, saturation_mw_cm2)")
            depth = None
        if "pulse_us" not in v:
            problems.append("physical parameters need pulse_us")
            return 0.0, hbar, duty, None
        pulse_width = v["pulse_us"] * 1e-6
        if "duty" in v:
            problems.append("duty follows from pulse_us and the period; do not give both")
        periods = []
        if "period_us" in v:
            periods.append(v["period_us"] * 1e-6)
            hbar = scaled_hbar(periods[0], geometry)
        if sweep is not None and sweep.axis == "period_us":
            periods.append(sweep.start * 1e-6)
        elif sweep is not None:
            periods.append(period_from_hbar(sweep.start * math.pi, geometry))
        if periods and pulse_width >= min(periods):
            problems.append("t_p >= T: pulse_us is not shorter than every kick period")
        if periods:
            duty = pulse_width / min(periods) if duty is None else duty
        k = kick_strength(depth, pulse_width) if depth is not None else 0.0
        if depth is not None and depth <= 0:
            problems.append("lattice depth must be positive")
        return k, hbar, duty, pulse_width

    if cmd in ("scan", "peaks", "evolve", "diffusion") and "k" not in v:
        problems.append("missing key 'k' (or a physical parameter block)")
    k = v.get("k", 0.0)
    if k < 0 or (cmd == "diffusion" and k <= 0):
        problems.append("k must be positive")
    if hbar is not None and hbar <= 0:
        problems.append("scaled hbar must be positive")
    if duty is not None and not 0 < duty < 1:
        problems.append("duty must lie in (0, 1)")
    return k, hbar, duty, pulse_width


def _state(v, cmd, problems):
    name = v.get("state")
    if name is None:
        if cmd in ("scan", "peaks", "evolve"):
            problems.append("missing key 'state'")
        return None
    if name not in STATES:
        problems.append(f"state must be one of {', '.join(STATES)}, got {name!r}")
        return None
    um = 1e-6
    try:
        if name == "plane_wave":
            return PlaneWave(v.get("beta", 0.0))
        if name == "gaussian":
            if "width_um" not in v:
                problems.append("gaussian state needs width_um")
                return None
            center = v["center_um"] * um if "center_um" in v else None
            return Gaussian(v["width_um"] * um, center)
        if name == "comb":
            if "width_um" not in v or "envelope_um" not in v:
                problems.append("comb state needs width_um and envelope_um")
                return None
            spacing = v["spacing_um"] * um if "spacing_um" in v else None
            return Comb(v["width_um"] * um, v["envelope_um"] * um, spacing)
        kw = {}
        if "band_velocities_mm_s" in v:
            kw["velocities"] = tuple(x * 1e-3 for x in v["band_velocities_mm_s"])
        if "band_weights" in v:
            kw["weights"] = v["band_weights"]
        if "envelope_um" in v:
            kw["envelope"] = v["envelope_um"] * um
        return ThermalMixture(members=v.get("members", 64), seed=v.get("seed", 0), **kw)
    except ValueError as err:
        problems.append(str(err))
        return None


def bundled_configs() -> list[str]:
    return sorted(p.name[:-4] for p in resources.files("kickrotor.configs").iterdir()
                  if p.name.endswith(".ini"))


def bundled_config(name: str) -> str:
    return resources.files("kickrotor.configs").joinpath(f"{name}.ini").read_text()


def load_config(path_or_name: str, command: str | None = None, overrides: dict | None = None) -> RunConfig:
    """Parse a config file, or a bundled config by name (e.g. ``fig3b_comb``)."""
    path = Path(path_or_name)
    if path.exists():
        text = path.read_text()
    elif path_or_name in bundled_configs():
        text = bundled_config(path_or_name)
    else:
        raise ConfigError([f"no config file or bundled config named {path_or_name!r}"])
    return parse_config(text, command, overrides)
