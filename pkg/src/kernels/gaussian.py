import math
from dataclasses import dataclass
from typing import Iterable, Union

import numpy as np

from exceptions import InvalidArgumentError
from schemas import NormalizationModeEnum

DIRAC_EPS = 1e-6


@dataclass(frozen=True)
class Kernel:
    """A K x K filter; Gaussians are nonnegative, eigen-kernels signed."""

    weights: np.ndarray

    @property
    def size(self) -> int:
        return self.weights.shape[0]


def validate_kernel_size(kernel_size: int) -> None:
    if kernel_size < 1 or kernel_size % 2 == 0:
        raise InvalidArgumentError(
            f"Kernel size must be a positive odd integer, got {kernel_size}."
        )


def squared_radii(kernel_size: int) -> np.ndarray:
    """Squared distance of every K x K grid cell from the center."""
    offsets = np.arange(kernel_size, dtype=np.float64) - kernel_size // 2
    return offsets[:, None] ** 2 + offsets[None, :] ** 2


def distinct_radii_count(kernel_size: int) -> int:
    return int(np.unique(squared_radii(kernel_size)).size)


def _as_sigmas(
    sigmas: Union[float, Iterable[float], np.ndarray]
) -> np.ndarray:
    values = np.asarray(sigmas, dtype=np.float64).ravel()
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError("Sigma values must be finite.")
    if np.any(values < 0):
        raise InvalidArgumentError(
            f"Sigma must be nonnegative, got minimum {values.min()}."
        )
    return values


def gaussian_kernel_stack(
    kernel_size: int,
    sigmas: Union[float, Iterable[float], np.ndarray],
    mode: NormalizationModeEnum = NormalizationModeEnum.UNIT_SUM,
) -> np.ndarray:
    """
    Evaluate Gaussian kernels for many standard deviations at once.

    Args:
        kernel_size (int): Odd kernel side K.
        sigmas: Standard deviations, any shape; flattened.
        mode (NormalizationModeEnum): UNIT_SUM rescales every kernel to sum
            to one, PREFACTOR applies the 1 / (sqrt(2 pi) sigma) prefactor.

    Returns:
        np.ndarray: float64 array of shape (n, K, K). Sigmas at or below
        DIRAC_EPS yield the Dirac kernel in both modes.
    """
    validate_kernel_size(kernel_size)
    values = _as_sigmas(sigmas)
    r2 = squared_radii(kernel_size)
    center = kernel_size // 2

    kernels = np.zeros((values.size, kernel_size, kernel_size))
    smooth = values > DIRAC_EPS
    s = values[smooth][:, None, None]
    weights = np.exp(-r2[None] / (2.0 * s ** 2))
    if mode == NormalizationModeEnum.UNIT_SUM:
        weights /= weights.sum(axis=(1, 2), keepdims=True)
    else:
        weights /= math.sqrt(2.0 * math.pi) * s
    kernels[smooth] = weights
    kernels[~smooth, center, center] = 1.0
    return kernels


def gaussian_kernel_derivative_stack(
    kernel_size: int,
    sigmas: Union[float, Iterable[float], np.ndarray],
    mode: NormalizationModeEnum = NormalizationModeEnum.UNIT_SUM,
) -> np.ndarray:
    """
    Derivative dG/dsigma of gaussian_kernel_stack, zero in the Dirac regime.
    """
    values = _as_sigmas(sigmas)
    kernels = gaussian_kernel_stack(kernel_size, values, mode)
    r2 = squared_radii(kernel_size)[None]

    derivatives = np.zeros_like(kernels)
    smooth = values > DIRAC_EPS
    s = values[smooth][:, None, None]
    g = kernels[smooth]
    if mode == NormalizationModeEnum.UNIT_SUM:
        mean_r2 = (g * r2).sum(axis=(1, 2), keepdims=True)
        derivatives[smooth] = g * (r2 - mean_r2) / s ** 3
    else:
        derivatives[smooth] = g * (r2 / s ** 3 - 1.0 / s)
    return derivatives


def gaussian_kernel(
    kernel_size: int,
    sigma: float,
    mode: NormalizationModeEnum = NormalizationModeEnum.UNIT_SUM,
) -> Kernel:
    """Single Gaussian kernel, Dirac for sigma <= DIRAC_EPS."""
    return Kernel(weights=gaussian_kernel_stack(kernel_size, sigma, mode)[0])
