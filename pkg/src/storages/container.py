import struct

import numpy as np

from exceptions import ContainerFormatError

MAGIC = b"FTNS"
VERSION = 1
MAX_RANK = 4

_HEADER = struct.Struct("<4sII")
_PAYLOAD_DTYPE = np.dtype("<f4")


def encode_tensor(array: np.ndarray) -> bytes:
    """
    Serialize an array as an FTNS container: magic, u32 version, u32 rank,
    rank u32 dims, then little-endian float32 values in C order.

    Raises:
        ContainerFormatError: If the rank is outside [1, 4].
    """
    array = np.asarray(array)
    if not 1 <= array.ndim <= MAX_RANK:
        raise ContainerFormatError(
            f"Tensor rank must lie in [1, {MAX_RANK}], got {array.ndim}."
        )
    header = _HEADER.pack(MAGIC, VERSION, array.ndim)
    dims = struct.pack(f"<{array.ndim}I", *array.shape)
    payload = np.ascontiguousarray(array, dtype=_PAYLOAD_DTYPE).tobytes()
    return header + dims + payload


def decode_tensor(data: bytes) -> np.ndarray:
    """
    Parse an FTNS container back into a native-endian float32 array.

    Raises:
        ContainerFormatError: On a bad magic, unknown version, rank out of
        range or a payload whose length disagrees with the dims.
    """
    if len(data) < _HEADER.size:
        raise ContainerFormatError("Container is shorter than its header.")
    magic, version, rank = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ContainerFormatError(f"Bad container magic {magic!r}.")
    if version != VERSION:
        raise ContainerFormatError(f"Unsupported container version {version}.")
    if not 1 <= rank <= MAX_RANK:
        raise ContainerFormatError(f"Container rank {rank} is out of range.")

    offset = _HEADER.size + 4 * rank
    if len(data) < offset:
        raise ContainerFormatError("Container is truncated inside its dims.")
    dims = struct.unpack_from(f"<{rank}I", data, _HEADER.size)

    expected = 4 * int(np.prod(dims, dtype=np.int64))
    if len(data) - offset != expected:
        raise ContainerFormatError(
            f"Payload holds {len(data) - offset} bytes, dims {dims} "
            f"require {expected}."
        )
    values = np.frombuffer(data, dtype=_PAYLOAD_DTYPE, offset=offset)
    return values.reshape(dims).astype(np.float32)
