from exceptions.numerics import InvalidArgumentError


class BaseTrainingError(Exception):
    """Base class for errors raised while training networks."""

    def __init__(self, message=None):
        if message is None:
            message = "A training error occurred."
        super().__init__(message)


class EmptyDatasetError(InvalidArgumentError):
    """Raised when a training or evaluation set is empty."""

    def __init__(self, message="Dataset is empty."):
        super().__init__(message)


class MissingDecoderError(InvalidArgumentError):
    """Raised when a PENet phase needs a pre-trained decoder that is absent."""

    def __init__(
        self, message="A pre-trained perspective decoder is required."
    ):
        super().__init__(message)
