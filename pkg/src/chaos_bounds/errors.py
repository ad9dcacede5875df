"""Exception types shared across the package."""


class ChaosBoundsError(Exception):
    """Base class for all package errors."""


class ValidationError(ChaosBoundsError, ValueError):
    """Malformed input: shape mismatches, bad parameters, unparsable descriptors."""


class NumericError(ChaosBoundsError, ArithmeticError):
    """A computation produced NaN or otherwise failed numerically."""


class UnsupportedSpaceError(ValidationError):
    """The requested quantity is not defined for this value space."""
