class BaseStorageError(Exception):
    """Base class for all tensor storage errors."""

    def __init__(self, message=None):
        if message is None:
            message = "A storage error occurred."
        super().__init__(message)


class ContainerFormatError(BaseStorageError):
    """Raised when a tensor container is malformed."""

    def __init__(self, message="Malformed tensor container."):
        super().__init__(message)


class TensorFileNotFoundError(BaseStorageError):
    """Raised when a requested file does not exist in storage."""

    def __init__(self, message="Requested file not found in storage."):
        super().__init__(message)
