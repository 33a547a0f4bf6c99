"""Exception types shared across the package."""


class CombError(Exception):
    """Base class for all package errors."""


class ResolutionError(CombError, ValueError):
    """A time grid is too coarse for the requested physics."""


class DivergenceError(CombError, ArithmeticError):
    """Non-finite values appeared while stepping the solver."""

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class PaddingError(CombError, ValueError):
    """The FFT buffer is too short to contain the resonant tail."""

    def __init__(self, message: str, required_length: int):
        super().__init__(message)
        self.required_length = required_length


class CoverageError(CombError, ValueError):
    """An integration window falls outside the sampled grid."""


class ValidationError(CombError, ValueError):
    """A scenario or sweep file failed validation.

    ``key`` is the dotted path of the offending entry.
    """

    def __init__(self, message: str, key: str = ""):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class BudgetError(CombError, RuntimeError):
    """A sweep grid exceeds the configured point budget."""


class UnsupportedComparisonError(CombError, ValueError):
    """Cross-solver comparison requested for a time-dependent schedule."""
