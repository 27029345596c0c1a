"""Exception hierarchy shared by all covkit modules."""


class CovkitError(Exception):
    """Base class for every error raised by covkit."""


class ShapeError(CovkitError, ValueError):
    """Matrix dimensions are inconsistent."""


class InputError(CovkitError, ValueError):
    """A parameter is outside its admissible range."""


class NumericRangeError(CovkitError, ArithmeticError):
    """A computation produced non-finite values."""


class SolvabilityError(CovkitError, ArithmeticError):
    """A linear matrix equation has no unique solution."""


class SingularityError(CovkitError, ArithmeticError):
    """A matrix that must be inverted is (numerically) singular."""


class ConvergenceError(CovkitError, ArithmeticError):
    """An iterative kernel failed to converge."""


class StabilityError(CovkitError):
    """The dynamics matrix is not Hurwitz."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class FeedthroughError(CovkitError):
    """White noise reaches the output through a nonzero D matrix."""


class WellPosednessError(CovkitError):
    """An interconnection contains a singular algebraic loop."""


class ConsistencyError(CovkitError, ArithmeticError):
    """Computed covariances violate an internal identity (numerical breakdown)."""


class ModelParseError(CovkitError, ValueError):
    """A model file could not be parsed into a state-space model."""
