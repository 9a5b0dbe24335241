"""Exception hierarchy shared by every module of the package."""


class GameformError(Exception):
    """Base class for all errors raised by gameform."""


class DimensionMismatch(GameformError, ValueError):
    def __init__(self, what, expected, given):
        self.what = what
        self.expected = expected
        self.given = given
        super().__init__(f"{what}: expected length {expected}, got {given}")


class ConfigError(GameformError, ValueError):
    """A game configuration failed validation; ``path`` is a JSON path like ``$.base.Q``."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")


class PreconditionError(GameformError, ValueError):
    pass


class NotSymmetric(GameformError, ValueError):
    pass


class SingularMatrix(GameformError, ArithmeticError):
    """Raised by the LU solver when a pivot falls below the relative threshold."""


class NoConvergence(GameformError, ArithmeticError):
    """QR iteration ran out of sweeps.

    ``eigenvalues`` holds whatever was deflated so far; ``valid`` flags which
    of those entries are trustworthy.
    """

    def __init__(self, message, eigenvalues=None, valid=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.valid = valid


class NonFiniteEncountered(GameformError, ArithmeticError):
    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class NumericalOverflow(GameformError, OverflowError):
    pass


class CorrectorFailed(GameformError, ArithmeticError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t
