from exceptions.numerics import (
    BaseNumericsError,
    InvalidArgumentError,
    ShapeMismatchError,
    NumericalFailureError,
)
from exceptions.storage import (
    BaseStorageError,
    ContainerFormatError,
    TensorFileNotFoundError,
)
from exceptions.training import (
    BaseTrainingError,
    EmptyDatasetError,
    MissingDecoderError,
)
from exceptions.exit_codes import exit_code_for
