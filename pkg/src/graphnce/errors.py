"""Exception hierarchy shared across the package."""


class GraphNCEError(Exception):
    """Base class for all package errors."""


class ValidationError(GraphNCEError, ValueError):
    """Invalid input data or configuration."""


class DomainError(GraphNCEError, ValueError):
    """Argument outside the domain of a function (e.g. eta on the diagonal)."""


class EvaluationError(GraphNCEError, ArithmeticError):
    """A user-supplied function returned a non-finite value."""


class NumericalError(GraphNCEError, ArithmeticError):
    """A non-finite intermediate appeared during time integration."""

    def __init__(self, message: str, time: float | None = None):
        super().__init__(message)
        self.time = time


class ConvergenceError(GraphNCEError, RuntimeError):
    """Picard iteration exceeded its iteration budget."""

    def __init__(self, message: str, distances=(), window: int | None = None):
        super().__init__(message)
        self.distances = list(distances)
        self.window = window


class UndefinedRatioError(GraphNCEError, ZeroDivisionError):
    """Contraction ratio requested for two identical curves."""


class PreconditionError(GraphNCEError, ValueError):
    """An operation's precondition does not hold."""
