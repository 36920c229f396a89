"""Mode-by-mode laboratory for time-domain combined-field integral equations on the sphere."""

from .kernels import BACKEND
from .mode import BoundarySignal, DelayCoefficients, ModeParams
from .solver import SolverConfig, solve_mode, solve_mode0_correction_form

__all__ = [
    "BACKEND",
    "BoundarySignal",
    "DelayCoefficients",
    "ModeParams",
    "SolverConfig",
    "solve_mode",
    "solve_mode0_correction_form",
]
__version__ = "0.1.0"
