"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class SLConeError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SLConeError, ValueError):
    """An input violates a documented precondition."""


class NumericalError(SLConeError, RuntimeError):
    """A numerical procedure failed to reach its target accuracy."""


class ConvergenceError(NumericalError):
    """Newton iteration did not converge.

    ``history`` holds the sup-norm of the residual after every iteration.
    """

    def __init__(self, message: str, history: list[float] | None = None):
        super().__init__(message)
        self.history = list(history or [])


class BifurcationError(NumericalError):
    """The linearised operator is (numerically) singular."""

    def __init__(self, message: str, smallest_singular_value: float):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value


class IntegrationError(NumericalError):
    """Frame integration drifted or the connection is not flat enough."""


class DegenerateCurveError(SLConeError, ValueError):
    """A curve is singular where smoothness is required."""


class DegenerateCurveWarning(UserWarning):
    """A curve model has repeated branch points."""
