"""Structure-preserving semi-implicit finite-volume solver for the GPR model.

One time step is split into four stages (transport, heat, G-J-v wave, pressure
wave) followed by compatible updates of A, J and E on a vertex-staggered grid.
"""

from .exceptions import (BreakdownError, ConfigurationError, ConvergenceError, DimensionError,
                         DomainError, GPRError, SolverError, SPDViolationError, StateError,
                         SubsystemError, TimeStepFailure)
from .grid import Boundary, GridSpec
from .model import ConservedState, ModelParams, state_from_primitives

__version__ = "0.1.0"

__all__ = [
    "Boundary", "GridSpec", "ModelParams", "ConservedState", "state_from_primitives",
    "GPRError", "DimensionError", "DomainError", "StateError", "ConfigurationError",
    "TimeStepFailure", "SolverError", "ConvergenceError", "SPDViolationError",
    "BreakdownError", "SubsystemError",
]
