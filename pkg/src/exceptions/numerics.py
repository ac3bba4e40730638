class BaseNumericsError(Exception):
    """Base class for all errors raised by the numerical modules."""

    def __init__(self, message=None):
        if message is None:
            message = "A numerical error occurred."
        super().__init__(message)


class InvalidArgumentError(BaseNumericsError, ValueError):
    """Raised when an argument violates an operation's precondition."""

    def __init__(self, message="Invalid argument."):
        super().__init__(message)


class ShapeMismatchError(InvalidArgumentError):
    """Raised when tensor, map or parameter shapes do not agree."""

    def __init__(self, message="Shape mismatch."):
        super().__init__(message)


class NumericalFailureError(BaseNumericsError):
    """Raised when a computation produces NaN or infinite values."""

    def __init__(self, message="Non-finite value detected."):
        super().__init__(message)
