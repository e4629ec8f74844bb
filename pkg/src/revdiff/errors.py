"""Exception types shared across the package."""


class DomainError(ValueError):
    """An interval or time lies outside the region a grid or window covers."""


class NumericError(ArithmeticError):
    """Non-finite values reached a routine that needs finite input."""


class PreconditionError(ValueError):
    """Inputs violate a documented precondition (normalisation, frame count, ...)."""


class DegenerateInputError(ValueError):
    """Input is structurally valid but carries no usable information (zero field, zero denominator)."""


class SolverError(ArithmeticError):
    """A linear solve left a residual above tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class UndefinedByTheoryError(ValueError):
    """A combination of events or sides that the calculus leaves undefined."""
