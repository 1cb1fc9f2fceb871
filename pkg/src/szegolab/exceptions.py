"""
Error hierarchy for szegolab.

Constraint errors mean the caller asked for something outside the domain of a
formula (CLI exit code 1); numeric errors mean a computation ran but did not
reach the requested accuracy (CLI exit code 2).
"""

from typing import Optional


class LabError(Exception):
    """Base class for all szegolab errors"""

    exit_code: int = 2


class ConstraintError(LabError, ValueError):
    """Parameters violate a precondition"""

    exit_code = 1


class InvalidParameterError(ConstraintError):
    pass


class UnsupportedOrderError(ConstraintError):
    pass


class DomainError(ConstraintError):
    pass


class ShapeMismatchError(ConstraintError):
    pass


class ProjectionError(ConstraintError):
    pass


class NotPositiveSemidefiniteError(ConstraintError):
    pass


class NyquistError(ConstraintError):
    """Grid too coarse for the requested frequency support"""

    def __init__(self, message: str, required_n: int):
        super().__init__(message)
        self.required_n = required_n


class FitError(ConstraintError):
    """Least-squares fit of the alpha sweep is ill-conditioned"""

    def __init__(self, message: str, min_span: float = 2.0):
        super().__init__(message)
        self.min_span = min_span


class NumericError(LabError, ArithmeticError):
    """A computation did not reach the requested accuracy"""

    exit_code = 2


class SeminormDivergenceError(NumericError):
    pass


class EigenSolverError(NumericError):
    pass


class QuadratureError(NumericError):
    """Adaptive quadrature stopped before reaching its tolerance"""

    def __init__(self, message: str, achieved_error: float, refinements: Optional[int] = None):
        super().__init__(message)
        self.achieved_error = achieved_error
        self.refinements = refinements
