import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import svd

from exceptions import InvalidArgumentError
from kernels.gaussian import (
    Kernel,
    distinct_radii_count,
    gaussian_kernel_derivative_stack,
    gaussian_kernel_stack,
)
from schemas import DictionaryConfigSchema, DictionaryMetadataSchema

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class KernelDictionary:
    """
    Sampled Gaussian candidates and the orthonormal eigen-kernels spanning
    them. Arrays are read-only so one dictionary can be shared freely.

    Attributes:
        config (DictionaryConfigSchema): Construction parameters.
        sigma_grid (np.ndarray): (N,) sampled standard deviations.
        candidates (np.ndarray): (N, K*K) float32 flattened candidates.
        eigen_kernels (np.ndarray): (C, K*K) float32 retained basis.
        singular_values (np.ndarray): (N,) float64, nonincreasing, zero padded
            when N exceeds K*K.
        retained_count (int): C.
        energy_ratio (float): Share of the squared singular values kept
            by C.
    """

    config: DictionaryConfigSchema
    sigma_grid: np.ndarray
    candidates: np.ndarray
    eigen_kernels: np.ndarray
    singular_values: np.ndarray
    retained_count: int
    energy_ratio: float

    @property
    def kernel_size(self) -> int:
        return self.config.kernel_size

    @property
    def grid_size(self) -> int:
        return self.sigma_grid.size

    @property
    def sigma_min(self) -> float:
        return self.config.sigma_min

    @property
    def sigma_max(self) -> float:
        return self.config.sigma_max

    @property
    def eigen_grids(self) -> np.ndarray:
        k = self.kernel_size
        return self.eigen_kernels.reshape(self.retained_count, k, k)

    def clamp(self, sigmas: np.ndarray) -> np.ndarray:
        return np.clip(sigmas, self.sigma_min, self.sigma_max)

    def project(self, sigmas: np.ndarray) -> np.ndarray:
        """
        Coefficients <G_q, G_s> for s = sigma clamped into [c, d].

        Returns:
            np.ndarray: float64 array of shape (n, C).
        """
        clamped = self.clamp(np.asarray(sigmas, dtype=np.float64).ravel())
        kernels = gaussian_kernel_stack(
            self.kernel_size, clamped, self.config.normalization_mode
        ).reshape(clamped.size, -1)
        return kernels @ self.eigen_kernels.astype(np.float64).T

    def project_derivative(self, sigmas: np.ndarray) -> np.ndarray:
        """d<G_q, G_s>/dsigma; zero where the clamp is active."""
        values = np.asarray(sigmas, dtype=np.float64).ravel()
        clamped = self.clamp(values)
        derivatives = gaussian_kernel_derivative_stack(
            self.kernel_size, clamped, self.config.normalization_mode
        ).reshape(clamped.size, -1)
        result = derivatives @ self.eigen_kernels.astype(np.float64).T
        inside = (values > self.sigma_min) & (values < self.sigma_max)
        result[~inside] = 0.0
        return result

    def metadata(self) -> DictionaryMetadataSchema:
        return DictionaryMetadataSchema(
            kernel_size=self.kernel_size,
            sigma_min=self.sigma_min,
            sigma_max=self.sigma_max,
            sigma_step=self.config.sigma_step,
            normalization_mode=self.config.normalization_mode,
            energy_threshold=self.config.energy_threshold,
            retained_count=self.retained_count,
            requested_count=self.config.retained_count,
            grid_size=self.grid_size,
            energy_ratio=self.energy_ratio,
            singular_values=[float(v) for v in self.singular_values],
        )


def sigma_grid(config: DictionaryConfigSchema) -> np.ndarray:
    count = config.grid_size
    if count < 1:
        raise InvalidArgumentError("Sigma grid is empty.")
    grid = config.sigma_min + config.sigma_step * np.arange(count)
    return np.minimum(np.round(grid, 12), config.sigma_max)


def _cumulative_ratio(singular_values: np.ndarray) -> np.ndarray:
    # PCA energy of a component is its squared singular value; the last
    # entry is the total, so the full-rank ratio is exactly 1
    cumulative = np.cumsum(np.square(singular_values))
    return cumulative / cumulative[-1]


def _select_retained_count(
    config: DictionaryConfigSchema, ratios: np.ndarray, available: int
) -> int:
    """
    C = (K+1)//2 when that many eigen-kernels reach the energy threshold,
    otherwise the smallest count that does.
    """
    if config.retained_count is not None:
        if config.retained_count > available:
            raise InvalidArgumentError(
                f"retained_count={config.retained_count} exceeds the "
                f"{available} available eigen-kernels."
            )
        return config.retained_count

    cap = min((config.kernel_size + 1) // 2, available)
    if ratios[cap - 1] >= config.energy_threshold:
        return cap
    reached = np.nonzero(ratios[:available] >= config.energy_threshold - 1e-12)
    if reached[0].size == 0:
        return available
    return int(reached[0][0]) + 1


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude entry of every row positive."""
    fixed = vectors.copy()
    for row in fixed:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return fixed


def build_dictionary(config: DictionaryConfigSchema) -> KernelDictionary:
    """
    Sample the Gaussian family over the sigma grid and keep its leading
    right-singular vectors as eigen-kernels.

    The candidate matrix is decomposed as is, without mean-centering, so
    that sum_q <G_q, G_s> G_q reconstructs G_s.

    Args:
        config (DictionaryConfigSchema): Kernel size, sigma grid,
            normalization and energy threshold.

    Returns:
        KernelDictionary: Immutable dictionary.

    Raises:
        InvalidArgumentError: If the grid is empty or a requested retained
        count is not available.
    """
    grid = sigma_grid(config)
    size = config.kernel_size
    candidates = gaussian_kernel_stack(
        size, grid, config.normalization_mode
    ).reshape(grid.size, size * size)

    _, singular, vt = svd(candidates, full_matrices=False)
    padded = np.zeros(grid.size)
    padded[:singular.size] = singular
    ratios = _cumulative_ratio(padded)

    retained = _select_retained_count(config, ratios, vt.shape[0])
    eigen = _fix_signs(vt[:retained])

    dictionary = KernelDictionary(
        config=config,
        sigma_grid=_frozen(grid),
        candidates=_frozen(candidates.astype(np.float32)),
        eigen_kernels=_frozen(eigen.astype(np.float32)),
        singular_values=_frozen(padded),
        retained_count=retained,
        energy_ratio=float(ratios[retained - 1]),
    )
    logger.debug(
        "Built dictionary K=%d N=%d C=%d energy=%.6f",
        size, grid.size, retained, dictionary.energy_ratio,
    )
    return dictionary


def energy_preserved(dictionary: KernelDictionary, count: int) -> float:
    """Share of PCA energy (squared singular values) in the top `count`."""
    if count < 1 or count > dictionary.grid_size:
        raise InvalidArgumentError(
            f"Count must lie in [1, {dictionary.grid_size}], got {count}."
        )
    return float(_cumulative_ratio(dictionary.singular_values)[count - 1])


def reconstruct_kernel(dictionary: KernelDictionary, sigma: float) -> Kernel:
    """Projection of G_sigma (sigma clamped into [c, d]) onto the basis."""
    if not np.isfinite(sigma) or sigma < 0:
        raise InvalidArgumentError(
            f"Sigma must be finite and nonnegative, got {sigma}."
        )
    coefficients = dictionary.project(np.array([sigma]))[0]
    basis = dictionary.eigen_kernels.astype(np.float64)
    size = dictionary.kernel_size
    return Kernel(weights=(coefficients @ basis).reshape(size, size))


def rank_profile(
    dictionary: KernelDictionary, relative_floor: float = 1e-6
) -> Tuple[int, int]:
    """Numerical rank of the candidates and the count of distinct radii."""
    values = dictionary.singular_values
    rank = int(np.sum(values > relative_floor * values[0]))
    return rank, distinct_radii_count(dictionary.kernel_size)
