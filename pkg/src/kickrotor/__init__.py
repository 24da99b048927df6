"""Simulation of the atom-optics quantum kicked rotor."""

__version__ = "0.1.0"

from .propagator import (  # noqa: E402
    DeltaKick, MomentumCutoffError, MomentumGrid, SquarePulse, WaveState, apply_kick, cycle, energy,
    evolve, free_evolve,
)
from .units import PhysicalParams, ScaledParams, derive_geometry, scale_params  # noqa: E402

__all__ = [
    "DeltaKick", "MomentumCutoffError", "MomentumGrid", "PhysicalParams", "ScaledParams",
    "SquarePulse", "WaveState", "apply_kick", "cycle", "derive_geometry", "energy", "evolve",
    "free_evolve", "scale_params",
]
