from typing import Optional, Tuple

import numpy as np

from exceptions import InvalidArgumentError, ShapeMismatchError
from schemas import PaddingModeEnum
from utils import parallel_map

_NUMPY_PAD_MODES = {
    PaddingModeEnum.REPLICATE: "edge",
    PaddingModeEnum.ZERO: "constant",
}


def as_tensor(x: np.ndarray, name: str = "input tensor") -> np.ndarray:
    """Validate a (channels, height, width) array of finite values."""
    x = np.asarray(x)
    if x.ndim != 3 or min(x.shape) < 1:
        raise ShapeMismatchError(
            f"{name} must have shape (channels, height, width), got {x.shape}."
        )
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError(f"{name} contains non-finite values.")
    return x


def output_dtype(x: np.ndarray) -> np.dtype:
    return np.result_type(x.dtype, np.float32)


def pad_spatial(
    x: np.ndarray, pad: int, padding: PaddingModeEnum
) -> np.ndarray:
    if pad == 0:
        return x
    return np.pad(
        x, ((0, 0), (pad, pad), (pad, pad)), mode=_NUMPY_PAD_MODES[padding]
    )


def pad_spatial_adjoint(
    grad: np.ndarray, pad: int, padding: PaddingModeEnum
) -> np.ndarray:
    """Transpose of pad_spatial: border gradients fold back onto the edge."""
    if pad == 0:
        return grad
    if padding == PaddingModeEnum.REPLICATE:
        grad = grad.copy()
        grad[:, pad, :] += grad[:, :pad, :].sum(axis=1)
        grad[:, -pad - 1, :] += grad[:, -pad:, :].sum(axis=1)
        grad[:, :, pad] += grad[:, :, :pad].sum(axis=2)
        grad[:, :, -pad - 1] += grad[:, :, -pad:].sum(axis=2)
    return grad[:, pad:-pad, pad:-pad]


def conv_output_size(
    size: int, kernel_size: int, stride: int = 1, dilation: int = 1
) -> int:
    """Output length of a sliding window over an already padded axis."""
    span = dilation * (kernel_size - 1) + 1
    if size < span:
        raise ShapeMismatchError(
            f"Axis of length {size} is shorter than the kernel span {span}."
        )
    return (size - span) // stride + 1


def unfold(
    padded: np.ndarray,
    kernel_size: int,
    out_shape: Tuple[int, int],
    stride: int = 1,
    dilation: int = 1,
) -> np.ndarray:
    """
    Gather sliding windows of a padded (C, Hp, Wp) array.

    Returns:
        np.ndarray: (C, K, K, out_h, out_w) array where [:, dk, dl] holds the
        input sample at window offset (dk, dl) for every output position.
    """
    channels = padded.shape[0]
    out_h, out_w = out_shape
    cols = np.empty(
        (channels, kernel_size, kernel_size, out_h, out_w), dtype=padded.dtype
    )
    for dk in range(kernel_size):
        r0 = dk * dilation
        rows = slice(r0, r0 + stride * (out_h - 1) + 1, stride)
        for dl in range(kernel_size):
            c0 = dl * dilation
            columns = slice(c0, c0 + stride * (out_w - 1) + 1, stride)
            cols[:, dk, dl] = padded[:, rows, columns]
    return cols


def fold(
    cols: np.ndarray,
    padded_shape: Tuple[int, int, int],
    stride: int = 1,
    dilation: int = 1,
) -> np.ndarray:
    """Transpose of unfold: scatter-add windows back into a padded array."""
    _, kernel_size, _, out_h, out_w = cols.shape
    result = np.zeros(padded_shape, dtype=cols.dtype)
    for dk in range(kernel_size):
        r0 = dk * dilation
        rows = slice(r0, r0 + stride * (out_h - 1) + 1, stride)
        for dl in range(kernel_size):
            c0 = dl * dilation
            columns = slice(c0, c0 + stride * (out_w - 1) + 1, stride)
            result[:, rows, columns] += cols[:, dk, dl]
    return result


def _kernel_bank(kernels: np.ndarray) -> np.ndarray:
    kernels = np.asarray(kernels, dtype=np.float64)
    if kernels.ndim == 2:
        kernels = kernels[None]
    if kernels.shape[1] != kernels.shape[2] or kernels.shape[1] % 2 == 0:
        raise InvalidArgumentError(
            f"Kernels must be odd and square, got {kernels.shape[1:]}."
        )
    return kernels


def correlate_bank(
    x: np.ndarray,
    kernels: np.ndarray,
    padding: PaddingModeEnum = PaddingModeEnum.REPLICATE,
    threads: Optional[int] = None,
) -> np.ndarray:
    """
    Same-size correlation of every channel with every kernel.

    Each channel is unfolded once and multiplied with the flattened bank,
    accumulating in float64.

    Args:
        x (np.ndarray): (C_f, H, W) input.
        kernels (np.ndarray): (n, K, K) or (K, K) kernels.
        padding (PaddingModeEnum): Boundary handling.
        threads (int, optional): Channel workers; PGC_THREADS when None.

    Returns:
        np.ndarray: float64 array of shape (n, C_f, H, W).
    """
    x = as_tensor(x)
    bank = _kernel_bank(kernels)
    count, size = bank.shape[0], bank.shape[1]
    channels, height, width = x.shape
    flat = bank.reshape(count, size * size)
    padded = pad_spatial(x.astype(np.float64), size // 2, padding)

    def correlate_channel(channel: int) -> np.ndarray:
        cols = unfold(padded[channel:channel + 1], size, (height, width))
        return (flat @ cols.reshape(size * size, height * width)).reshape(
            count, height, width
        )

    planes = parallel_map(correlate_channel, range(channels), threads)
    return np.stack(planes, axis=1)


def correlate_bank_adjoint(
    grads: np.ndarray,
    kernels: np.ndarray,
    padding: PaddingModeEnum = PaddingModeEnum.REPLICATE,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Gradient of sum(grads * correlate_bank(x, kernels)) w.r.t. x."""
    bank = _kernel_bank(kernels)
    count, size = bank.shape[0], bank.shape[1]
    if grads.ndim != 4 or grads.shape[0] != count:
        raise ShapeMismatchError(
            f"Gradient shape {grads.shape} does not match {count} kernels."
        )
    _, channels, height, width = grads.shape
    flat_t = bank.reshape(count, size * size).T
    pad = size // 2
    padded_shape = (1, height + 2 * pad, width + 2 * pad)

    def channel_adjoint(channel: int) -> np.ndarray:
        plane = grads[:, channel].reshape(count, height * width)
        cols = (flat_t @ plane).reshape(1, size, size, height, width)
        return pad_spatial_adjoint(fold(cols, padded_shape), pad, padding)[0]

    planes = parallel_map(channel_adjoint, range(channels), threads)
    return np.stack(planes, axis=0)


def correlate_same(
    x: np.ndarray,
    kernel: np.ndarray,
    padding: PaddingModeEnum = PaddingModeEnum.REPLICATE,
) -> np.ndarray:
    """Spatially invariant correlation of every channel with one kernel."""
    return correlate_bank(x, kernel, padding)[0]


def correlate_same_adjoint(
    grad: np.ndarray,
    kernel: np.ndarray,
    padding: PaddingModeEnum = PaddingModeEnum.REPLICATE,
) -> np.ndarray:
    return correlate_bank_adjoint(grad[None], kernel, padding)


def as_blur_map(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma)
    if sigma.ndim != 2:
        raise ShapeMismatchError(
            f"Blur map must be two-dimensional, got shape {sigma.shape}."
        )
    if not np.all(np.isfinite(sigma)):
        raise InvalidArgumentError("Blur map contains non-finite values.")
    if np.any(sigma < 0):
        raise InvalidArgumentError("Blur map values must be nonnegative.")
    return sigma


def check_spatial_match(x: np.ndarray, spatial: np.ndarray, name: str) -> None:
    if x.shape[1:] != spatial.shape:
        raise ShapeMismatchError(
            f"{name} shape {spatial.shape} does not match tensor spatial "
            f"shape {x.shape[1:]}."
        )
