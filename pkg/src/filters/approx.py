import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from exceptions import ShapeMismatchError
from filters.convolution import (
    as_blur_map,
    as_tensor,
    check_spatial_match,
    correlate_bank,
    correlate_bank_adjoint,
    output_dtype,
)
from kernels import DIRAC_EPS, KernelDictionary
from perspective import is_row_constant
from schemas import PaddingModeEnum

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoefficientMaps:
    """
    Per-pixel projections u_q of the local Gaussian onto each eigen-kernel.

    Attributes:
        maps (np.ndarray): (C, H, W) float64 coefficients; zero where the
            identity bypass applies.
        identity_mask (np.ndarray): (H, W) booleans, True where sigma is at
            or below DIRAC_EPS and the pixel passes through unchanged.
        sigma (np.ndarray): The blur map the maps were computed from.
        row_shared (bool): Whether rows were evaluated once and broadcast.
        evaluations (int): Number of sigma values actually projected.
    """

    maps: np.ndarray
    identity_mask: np.ndarray
    sigma: np.ndarray
    row_shared: bool
    evaluations: int

    @property
    def count(self) -> int:
        return self.maps.shape[0]


@dataclass(frozen=True)
class ApproxFilterCache:
    coefficients: CoefficientMaps
    responses: Optional[np.ndarray]
    dictionary: KernelDictionary
    padding: PaddingModeEnum
    dtype: np.dtype
    shape: Tuple[int, int, int]


def _evaluate(
    sigma: np.ndarray, dictionary: KernelDictionary, derivative: bool
) -> Tuple[np.ndarray, bool, int]:
    project = (
        dictionary.project_derivative if derivative else dictionary.project
    )
    height, width = sigma.shape
    if is_row_constant(sigma):
        rows = project(sigma[:, 0])
        maps = np.repeat(rows.T[:, :, None], width, axis=2)
        return maps, True, height
    values = project(sigma.ravel())
    return values.T.reshape(-1, height, width), False, sigma.size


def coefficient_maps(
    sigma: np.ndarray, dictionary: KernelDictionary
) -> CoefficientMaps:
    """
    Coefficient maps u_q(i, j) = <G_q, G_clamp(sigma(i, j))>.

    Sigmas at or below DIRAC_EPS take the identity bypass instead of being
    clamped up to sigma_min; larger sigmas are clamped into the dictionary
    range. Row-constant maps are projected once per row.
    """
    sigma = as_blur_map(sigma)
    maps, row_shared, evaluations = _evaluate(sigma, dictionary, False)
    identity = sigma <= DIRAC_EPS
    maps[:, identity] = 0.0
    logger.debug(
        "Projected %d sigma values (row shared: %s)", evaluations, row_shared
    )
    return CoefficientMaps(
        maps=maps,
        identity_mask=identity,
        sigma=sigma,
        row_shared=row_shared,
        evaluations=evaluations,
    )


def coefficient_derivative_maps(
    coefficients: CoefficientMaps, dictionary: KernelDictionary
) -> np.ndarray:
    """du_q/dsigma; zero on the identity bypass and where clamping acts."""
    maps, _, _ = _evaluate(coefficients.sigma, dictionary, True)
    maps[:, coefficients.identity_mask] = 0.0
    return maps


def filter_approx_forward(
    x: np.ndarray,
    sigma: np.ndarray,
    dictionary: KernelDictionary,
    padding: PaddingModeEnum = PaddingModeEnum.REPLICATE,
    threads: Optional[int] = None,
) -> Tuple[np.ndarray, ApproxFilterCache]:
    """
    Low-rank spatially variant smoothing and the cache its backward needs.

    The output is sum_q u_q * (x corr G_q) over the retained eigen-kernels,
    plus x itself on identity-bypass pixels.

    Args:
        x (np.ndarray): (C_f, H, W) features.
        sigma (np.ndarray): (H, W) blur map.
        dictionary (KernelDictionary): Eigen-kernel basis.
        padding (PaddingModeEnum): Boundary handling of the C correlations.
        threads (int, optional): Channel workers; PGC_THREADS when None.

    Returns:
        Tuple[np.ndarray, ApproxFilterCache]: Smoothed features in
        result_type(x.dtype, float32) and the backward cache.
    """
    x = as_tensor(x)
    sigma = as_blur_map(sigma)
    check_spatial_match(x, sigma, "Blur map")

    coefficients = coefficient_maps(sigma, dictionary)
    dtype = output_dtype(x)
    if coefficients.identity_mask.all():
        # every pixel bypasses the basis
        cache = ApproxFilterCache(
            coefficients=coefficients,
            responses=None,
            dictionary=dictionary,
            padding=padding,
            dtype=dtype,
            shape=x.shape,
        )
        return x.astype(dtype, copy=True), cache

    responses = correlate_bank(x, dictionary.eigen_grids, padding, threads)
    smoothed = np.einsum("qhw,qchw->chw", coefficients.maps, responses)
    smoothed += np.where(coefficients.identity_mask, x.astype(np.float64), 0.0)

    cache = ApproxFilterCache(
        coefficients=coefficients,
        responses=responses,
        dictionary=dictionary,
        padding=padding,
        dtype=dtype,
        shape=x.shape,
    )
    return smoothed.astype(dtype), cache


def filter_approx(
    x: np.ndarray,
    sigma: np.ndarray,
    dictionary: KernelDictionary,
    padding: PaddingModeEnum = PaddingModeEnum.REPLICATE,
    threads: Optional[int] = None,
) -> np.ndarray:
    """Low-rank spatially variant Gaussian smoothing."""
    smoothed, _ = filter_approx_forward(x, sigma, dictionary, padding, threads)
    return smoothed


def filter_approx_backward(
    cache: ApproxFilterCache,
    grad: np.ndarray,
    threads: Optional[int] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gradients of the smoothed output with respect to x and the blur map.

    Returns:
        Tuple[np.ndarray, np.ndarray]: (grad_x, grad_sigma) in float64.
    """
    if grad.shape != cache.shape:
        raise ShapeMismatchError(
            f"Gradient shape {grad.shape} does not match output shape "
            f"{cache.shape}."
        )
    grad = grad.astype(np.float64)
    coefficients = cache.coefficients
    if cache.responses is None:
        return grad, np.zeros(coefficients.sigma.shape)

    gated = coefficients.maps[:, None] * grad[None]
    grad_x = correlate_bank_adjoint(
        gated, cache.dictionary.eigen_grids, cache.padding, threads
    )
    grad_x += np.where(coefficients.identity_mask, grad, 0.0)

    derivatives = coefficient_derivative_maps(coefficients, cache.dictionary)
    sensitivity = np.einsum("chw,qchw->qhw", grad, cache.responses)
    grad_sigma = np.sum(derivatives * sensitivity, axis=0)
    return grad_x, grad_sigma
