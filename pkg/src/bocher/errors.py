"""Exception types shared across the package."""


class BocherError(Exception):
    """Base class for all package-specific errors."""


class DivisionByZero(BocherError, ZeroDivisionError):
    pass


class UnknownRadical(BocherError):
    pass


class NotExpandable(BocherError):
    pass


class ZeroToOrder(BocherError):
    """Series identically zero below the truncation order."""


class ChartMismatch(BocherError):
    pass


class UnsupportedHamiltonian(BocherError):
    pass


class HomogeneityError(BocherError):
    pass


class UnknownSystem(BocherError, KeyError):
    pass


class BadIndex(BocherError, IndexError):
    pass


class DegeneratePair(BocherError):
    """The two generators do not determine the canonical potential system."""


class InvalidMultiplier(BocherError):
    pass


class NotASymmetry(BocherError):
    pass


class ClosureFailure(BocherError):
    pass


class NoLimit(BocherError):
    """A contracted operator keeps a pole at epsilon = 0."""

    def __init__(self, message, offending_order=None):
        super().__init__(message)
        self.offending_order = offending_order


class BadScale(BocherError):
    pass


class ParseError(BocherError, ValueError):
    pass
