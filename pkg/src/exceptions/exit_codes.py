from pydantic import ValidationError

from exceptions.numerics import (
    InvalidArgumentError,
    NumericalFailureError,
    ShapeMismatchError,
)
from exceptions.storage import BaseStorageError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def exit_code_for(e: Exception) -> int:
    # ShapeMismatchError is an InvalidArgumentError but concerns input data.
    errors = {
        ShapeMismatchError: EXIT_DATA,
        BaseStorageError: EXIT_DATA,
        FileNotFoundError: EXIT_DATA,
        NumericalFailureError: EXIT_NUMERICAL,
        ValidationError: EXIT_USAGE,
        InvalidArgumentError: EXIT_USAGE,
    }

    for error_type, code in errors.items():
        if isinstance(e, error_type):
            return code
    return EXIT_DATA
