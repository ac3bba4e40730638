import numpy as np

from filters.convolution import (
    as_blur_map,
    as_tensor,
    check_spatial_match,
    output_dtype,
    pad_spatial,
)
from kernels import gaussian_kernel, validate_kernel_size
from schemas import NormalizationModeEnum, PaddingModeEnum


def filter_exact(
    x: np.ndarray,
    sigma: np.ndarray,
    kernel_size: int,
    mode: NormalizationModeEnum = NormalizationModeEnum.UNIT_SUM,
    padding: PaddingModeEnum = PaddingModeEnum.REPLICATE,
) -> np.ndarray:
    """
    Brute-force spatially variant Gaussian smoothing.

    Every output pixel evaluates its own K x K Gaussian from sigma(i, j) and
    weights the padded input window with it. No clamping and no basis: this
    is the reference the low-rank path is checked against.

    Args:
        x (np.ndarray): (C_f, H, W) features.
        sigma (np.ndarray): (H, W) blur map.
        kernel_size (int): Odd window side K.
        mode (NormalizationModeEnum): Kernel normalization.
        padding (PaddingModeEnum): Boundary handling.

    Returns:
        np.ndarray: Smoothed features in result_type(x.dtype, float32).
    """
    validate_kernel_size(kernel_size)
    x = as_tensor(x)
    sigma = as_blur_map(sigma)
    check_spatial_match(x, sigma, "Blur map")

    _, height, width = x.shape
    padded = pad_spatial(x.astype(np.float64), kernel_size // 2, padding)
    smoothed = np.empty(x.shape, dtype=np.float64)
    for i in range(height):
        for j in range(width):
            kernel = gaussian_kernel(kernel_size, sigma[i, j], mode).weights
            window = padded[:, i:i + kernel_size, j:j + kernel_size]
            smoothed[:, i, j] = np.tensordot(
                window, kernel, axes=([1, 2], [0, 1])
            )
    return smoothed.astype(output_dtype(x))
