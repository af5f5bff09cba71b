"""Convergence bounds for finite local-oscillator homodyne measurements.

Submodules: ``core`` (types and fidelity conversions), ``bounds`` (closed-form
bounds), ``witness`` (exact coherent-state distances), ``planner`` (GKP
LO/resolution budgets), ``gkp`` (code and channel simulation), ``cli``.
"""

from .core import (
    ApparatusModel,
    BoundReport,
    ModeEnsemble,
    StateMoments,
    fidelity_from_distance_sq,
    fidelity_from_overlap,
    omega_bar_sq,
    validate_ensemble,
)

__version__ = "0.1.0"

__all__ = [
    "ApparatusModel",
    "BoundReport",
    "ModeEnsemble",
    "StateMoments",
    "fidelity_from_distance_sq",
    "fidelity_from_overlap",
    "omega_bar_sq",
    "validate_ensemble",
]
