"""Exception hierarchy shared by all modules."""


class DelayHedgeError(Exception):
    """Base class for every error raised by this package."""


class NotPositiveDefinite(DelayHedgeError, ValueError):
    def __init__(self, message="matrix is not positive definite", min_pivot=None):
        if min_pivot is not None:
            message = f"{message} (smallest pivot {min_pivot:.3e})"
        super().__init__(message)
        self.min_pivot = min_pivot


class DimensionMismatch(DelayHedgeError, ValueError):
    pass


class InvalidRange(DelayHedgeError, ValueError):
    pass


class InvalidParameter(DelayHedgeError, ValueError):
    pass


class ParseError(DelayHedgeError, ValueError):
    pass


class SingularPrincipalMinor(DelayHedgeError, ArithmeticError):
    """A denominator minor of the band-filling recursion vanished numerically."""


class ResultNotPD(DelayHedgeError, ArithmeticError):
    """The completed matrix R failed its final Cholesky check."""


class UtilityDiverges(DelayHedgeError, ArithmeticError):
    """Expected exponential utility is minus infinity for this strategy."""
