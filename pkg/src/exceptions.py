"""Exception hierarchy shared by every module of the toolkit."""


class RbsError(Exception):
    """Base class for toolkit errors."""


class InvalidDimensionError(RbsError, ValueError):
    """A dimension (n or m) is below what the operation supports."""


class InvalidInputError(RbsError, ValueError):
    """Malformed, unbalanced or out-of-range input."""


class NotInvertibleError(RbsError, ValueError):
    """The redistribution map cannot be inverted at the given point."""


class InvalidDensityError(RbsError, ValueError):
    """A density descriptor does not define a probability density on [0, 1]."""


class NumericError(RbsError, ArithmeticError):
    """Quadrature failure or arithmetic resource exhaustion."""


class ConfigurationError(RbsError, ValueError):
    """Invalid sampler configuration or environment setting."""


class UsageError(RbsError):
    """Invalid command-line flag combination."""


class ArtifactError(RbsError, OSError):
    """Unreadable or malformed CSV/JSON artifact."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
