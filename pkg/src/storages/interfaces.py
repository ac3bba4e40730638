from abc import ABC, abstractmethod
from typing import Any, Dict, List, Sequence

import numpy as np


class TensorStorageInterface(ABC):

    @abstractmethod
    def write_tensor(self, name: str, array: np.ndarray) -> str:
        """
        Store an array as a tensor container.

        :param name: Relative name of the file to be written.
        :param array: Array of rank 1 to 4; stored as float32.
        :return: Path of the written file.
        """
        pass

    @abstractmethod
    def read_tensor(self, name: str) -> np.ndarray:
        """
        Load a tensor container.

        :param name: Relative name of the stored file.
        :return: The float32 array.
        """
        pass

    @abstractmethod
    def write_json(self, name: str, document: Dict[str, Any]) -> str:
        pass

    @abstractmethod
    def read_json(self, name: str) -> Dict[str, Any]:
        pass

    @abstractmethod
    def write_csv(
        self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]
    ) -> str:
        """
        Store rows as comma-separated text.

        :param name: Relative name of the file to be written.
        :param header: Column names; omitted from the file when empty.
        :param rows: Row values.
        :return: Path of the written file.
        """
        pass

    @abstractmethod
    def read_csv(self, name: str, has_header: bool = True) -> List[List[str]]:
        pass

    @abstractmethod
    def write_bytes(self, name: str, data: bytes) -> str:
        pass

    @abstractmethod
    def read_bytes(self, name: str) -> bytes:
        pass

    @abstractmethod
    def exists(self, name: str) -> bool:
        pass

    @abstractmethod
    def child(self, name: str) -> "TensorStorageInterface":
        """
        Storage rooted at a subdirectory.

        :param name: Relative name of the subdirectory.
        :return: A storage of the same kind.
        """
        pass
