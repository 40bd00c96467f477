"""Exception hierarchy shared by all solver stages."""


class GPRError(Exception):
    """Base class for every error raised by :mod:`gprsplit`."""


class DimensionError(GPRError, ValueError):
    """A field does not match the grid it is used with."""


class DomainError(GPRError, ValueError):
    """An argument lies outside the domain of a pointwise function."""


class StateError(GPRError):
    """The discrete state became unphysical (negative energy, inverted cell)."""


class ConfigurationError(GPRError, ValueError):
    """Inconsistent or unknown configuration input."""


class TimeStepFailure(GPRError):
    """The explicit step produced a non-positive density; retry with smaller dt."""


class SolverError(GPRError):
    """An iterative linear solver failed.

    Attributes
    ----------
    iterations : int
        Number of iterations performed before giving up.
    residual : float
        Last relative residual ``||b - Lx|| / ||b||``.
    """

    def __init__(self, message, iterations=0, residual=float("nan")):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class ConvergenceError(SolverError):
    """Iteration cap reached before the requested tolerance."""


class SPDViolationError(SolverError):
    """Conjugate gradients met non-positive curvature."""


class BreakdownError(SolverError):
    """A Krylov recurrence broke down (division by a vanishing scalar)."""


class SubsystemError(GPRError):
    """Wraps a failure inside one stage of the split time step."""

    def __init__(self, stage, step, cause):
        super().__init__(f"step {step}, stage '{stage}': {cause}")
        self.stage = stage
        self.step = step
        self.cause = cause
