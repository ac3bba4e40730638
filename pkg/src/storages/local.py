import csv
import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from exceptions import BaseStorageError, TensorFileNotFoundError
from storages.container import decode_tensor, encode_tensor
from storages.interfaces import TensorStorageInterface

logger = logging.getLogger(__name__)


class LocalTensorStorage(TensorStorageInterface):

    def __init__(self, root: Union[str, Path]):
        """
        Initialize a storage that resolves names under a local directory.

        Args:
            root (str | Path): Directory holding the stored files. Created
                lazily on the first write.
        """
        self._root = Path(root)

    @property
    def root(self) -> Path:
        return self._root

    def _path(self, name: str) -> Path:
        return self._root / name

    def _existing(self, name: str) -> Path:
        path = self._path(name)
        if not path.is_file():
            raise TensorFileNotFoundError(f"File not found: {path}")
        return path

    def write_bytes(self, name: str, data: bytes) -> str:
        path = self._path(name)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
        except OSError as e:
            raise BaseStorageError(f"Failed to write {path}: {e}") from e
        logger.debug("Wrote %d bytes to %s", len(data), path)
        return str(path)

    def read_bytes(self, name: str) -> bytes:
        return self._existing(name).read_bytes()

    def write_tensor(self, name: str, array: np.ndarray) -> str:
        return self.write_bytes(name, encode_tensor(array))

    def read_tensor(self, name: str) -> np.ndarray:
        return decode_tensor(self.read_bytes(name))

    def write_json(self, name: str, document: Dict[str, Any]) -> str:
        text = json.dumps(document, indent=2, sort_keys=True) + "\n"
        return self.write_bytes(name, text.encode("utf-8"))

    def read_json(self, name: str) -> Dict[str, Any]:
        path = self._existing(name)
        try:
            return json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise BaseStorageError(f"Malformed JSON in {path}: {e}") from e

    def write_csv(
        self, name: str, header: Sequence[str], rows: Sequence[Sequence[Any]]
    ) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        if header:
            writer.writerow(header)
        writer.writerows(rows)
        return self.write_bytes(name, buffer.getvalue().encode("utf-8"))

    def read_csv(self, name: str, has_header: bool = True) -> List[List[str]]:
        text = self._existing(name).read_text(encoding="utf-8")
        rows = [row for row in csv.reader(io.StringIO(text)) if row]
        return rows[1:] if has_header else rows

    def exists(self, name: str) -> bool:
        return self._path(name).exists()

    def child(self, name: str) -> "LocalTensorStorage":
        return LocalTensorStorage(self._path(name))
