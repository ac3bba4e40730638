import math
from typing import Optional, Sequence, Tuple

import numpy as np

from exceptions import InvalidArgumentError, ShapeMismatchError

GT_SIGMA = 0.5


def as_dots(dots: Sequence[Sequence[float]]) -> np.ndarray:
    """(n, 2) float64 array of (x, y) head positions."""
    array = np.asarray(dots, dtype=np.float64)
    if array.size == 0:
        return np.zeros((0, 2))
    if array.ndim != 2 or array.shape[1] != 2:
        raise ShapeMismatchError(
            f"Dots must be a list of (x, y) pairs, got shape {array.shape}."
        )
    return array


def make_density(
    dots: Sequence[Sequence[float]],
    height: int,
    width: int,
    sigma: float = GT_SIGMA,
) -> np.ndarray:
    """
    Ground-truth density: one normalized Gaussian per head.

    Pixel (i, j) has its center at (x, y) = (j + 0.5, i + 0.5). Each
    Gaussian is evaluated on a local window and renormalized over its
    in-image support, so every head contributes exactly one unit of mass.

    Args:
        dots: (x, y) positions with 0 <= x < width and 0 <= y < height.
        height (int): Map height.
        width (int): Map width.
        sigma (float): Gaussian standard deviation in pixels.

    Returns:
        np.ndarray: (height, width) float32 density map.

    Raises:
        InvalidArgumentError: On an out-of-bounds dot or nonpositive sigma.
    """
    if height < 1 or width < 1:
        raise InvalidArgumentError(
            f"Map dimensions must be positive, got {height}x{width}."
        )
    if sigma <= 0:
        raise InvalidArgumentError(f"Sigma must be positive, got {sigma}.")
    points = as_dots(dots)
    if points.size and (
        not np.all(np.isfinite(points))
        or np.any(points[:, 0] < 0) or np.any(points[:, 0] >= width)
        or np.any(points[:, 1] < 0) or np.any(points[:, 1] >= height)
    ):
        raise InvalidArgumentError(
            f"Dots must lie inside the {width}x{height} image."
        )

    density = np.zeros((height, width), dtype=np.float64)
    radius = int(math.ceil(4 * sigma)) + 1
    for x, y in points:
        row, col = int(y), int(x)
        top, bottom = max(row - radius, 0), min(row + radius + 1, height)
        left, right = max(col - radius, 0), min(col + radius + 1, width)
        dy = np.arange(top, bottom) + 0.5 - y
        dx = np.arange(left, right) + 0.5 - x
        weights = np.exp(
            -(dy[:, None] ** 2 + dx[None, :] ** 2) / (2 * sigma ** 2)
        )
        density[top:bottom, left:right] += weights / weights.sum()
    return density.astype(np.float32)


def count(density: np.ndarray, roi: Optional[np.ndarray] = None) -> float:
    """Sum of the density map, restricted to the ROI when one is given."""
    density = np.asarray(density)
    if roi is None:
        return float(np.sum(density, dtype=np.float64))
    roi = np.asarray(roi, dtype=bool)
    if roi.shape != density.shape:
        raise ShapeMismatchError(
            f"ROI shape {roi.shape} does not match density shape "
            f"{density.shape}."
        )
    return float(np.sum(density[roi], dtype=np.float64))


def block_sum_downsample(density: np.ndarray, factor: int) -> np.ndarray:
    """Sum over non-overlapping factor x factor cells; totals are preserved."""
    density = np.asarray(density)
    if factor < 1:
        raise InvalidArgumentError(f"Factor must be positive, got {factor}.")
    height, width = density.shape
    if height % factor or width % factor:
        raise ShapeMismatchError(
            f"Map of shape {density.shape} is not divisible by {factor}."
        )
    cells = density.reshape(height // factor, factor, width // factor, factor)
    return cells.sum(axis=(1, 3))


def mae_mse(
    pred_counts: Sequence[float], gt_counts: Sequence[float]
) -> Tuple[float, float]:
    """
    Mean absolute count error and the root of the mean squared count error.
    """
    pred = np.asarray(pred_counts, dtype=np.float64).ravel()
    gt = np.asarray(gt_counts, dtype=np.float64).ravel()
    if pred.size != gt.size:
        raise InvalidArgumentError(
            f"Got {pred.size} predictions for {gt.size} ground-truth counts."
        )
    if pred.size == 0:
        raise InvalidArgumentError("At least one count is required.")
    errors = pred - gt
    return float(np.mean(np.abs(errors))), float(np.sqrt(np.mean(errors ** 2)))
