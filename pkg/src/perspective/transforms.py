import logging
import math
from dataclasses import dataclass, fields
from typing import Dict, Iterable, Tuple

import numpy as np
from scipy.special import expit

from exceptions import InvalidArgumentError, ShapeMismatchError

logger = logging.getLogger(__name__)


@dataclass
class PerspectiveParams:
    """
    Trainable scalars of the perspective-to-blur mapping.

    alpha and beta shape the sigmoid normalization, a and p0 the rectified
    affine map from normalized perspective to blur standard deviation.
    """

    alpha: float = 1.0
    beta: float = 0.0
    a: float = 1.0
    p0: float = 0.0

    def __post_init__(self) -> None:
        for field in fields(self):
            value = float(getattr(self, field.name))
            if not math.isfinite(value):
                raise InvalidArgumentError(
                    f"Perspective parameter {field.name} must be finite, "
                    f"got {value}."
                )
            setattr(self, field.name, value)

    def as_dict(self) -> Dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def copy(self) -> "PerspectiveParams":
        return PerspectiveParams(**self.as_dict())


@dataclass(frozen=True)
class BlurTrace:
    """Intermediates of perspective -> blur kept for backpropagation."""

    perspective: np.ndarray
    normalized: np.ndarray
    pre_activation: np.ndarray
    blur: np.ndarray

    @property
    def active(self) -> np.ndarray:
        return self.pre_activation > 0


def _working_dtype(values: np.ndarray) -> np.dtype:
    return np.result_type(values.dtype, np.float32)


def _as_map(values: np.ndarray, name: str = "perspective map") -> np.ndarray:
    array = np.asarray(values)
    if array.ndim != 2:
        raise ShapeMismatchError(
            f"{name} must be two-dimensional, got shape {array.shape}."
        )
    if not np.all(np.isfinite(array)):
        raise InvalidArgumentError(f"{name} contains non-finite values.")
    return array.astype(_working_dtype(array), copy=False)


def normalize_perspective(
    p: np.ndarray, params: PerspectiveParams
) -> np.ndarray:
    """
    Sigmoid normalization 1 / (1 + exp(-alpha (p - beta))).

    Values are clipped to [tiny, 1 - eps] of the working dtype so the
    result stays strictly inside (0, 1) for any finite input.
    """
    p = _as_map(p)
    info = np.finfo(p.dtype)
    normalized = expit(params.alpha * (p - params.beta)).astype(p.dtype)
    return np.clip(normalized, info.tiny, 1 - info.eps).astype(p.dtype)


def blur_from_perspective(
    p_norm: np.ndarray, params: PerspectiveParams
) -> np.ndarray:
    """Rectified affine map max(a (p_norm - p0), 0) to blur sigmas."""
    p_norm = _as_map(p_norm, "normalized perspective map")
    return np.maximum(params.a * (p_norm - params.p0), 0).astype(p_norm.dtype)


def blur_trace(p: np.ndarray, params: PerspectiveParams) -> BlurTrace:
    p = _as_map(p)
    normalized = normalize_perspective(p, params)
    pre_activation = params.a * (normalized - params.p0)
    return BlurTrace(
        perspective=p,
        normalized=normalized,
        pre_activation=pre_activation,
        blur=np.maximum(pre_activation, 0),
    )


def blur_backward(
    trace: BlurTrace, params: PerspectiveParams, grad_blur: np.ndarray
) -> Tuple[PerspectiveParams, np.ndarray]:
    """
    Chain a gradient on the blur map back to the four perspective scalars
    and to the raw perspective map.

    The hinge subgradient is 0 wherever a (p_norm - p0) <= 0.

    Returns:
        Tuple[PerspectiveParams, np.ndarray]: Gradients of alpha, beta, a, p0
        packed in a PerspectiveParams, and the gradient on the perspective map.
    """
    if grad_blur.shape != trace.blur.shape:
        raise ShapeMismatchError(
            f"Blur gradient shape {grad_blur.shape} does not match "
            f"blur map shape {trace.blur.shape}."
        )
    grad = np.where(trace.active, grad_blur, 0.0)
    normalized = trace.normalized.astype(np.float64)
    slope = normalized * (1.0 - normalized)

    grad_normalized = params.a * grad
    grad_a = float(np.sum(grad * (normalized - params.p0)))
    grad_p0 = float(-params.a * np.sum(grad))
    grad_alpha = float(
        np.sum(grad_normalized * slope * (trace.perspective - params.beta))
    )
    grad_beta = float(-params.alpha * np.sum(grad_normalized * slope))
    grad_p = grad_normalized * slope * params.alpha

    grads = PerspectiveParams(
        alpha=grad_alpha, beta=grad_beta, a=grad_a, p0=grad_p0
    )
    return grads, grad_p.astype(trace.perspective.dtype)


def row_mean_collapse(m: np.ndarray) -> np.ndarray:
    """Replace every row by its arithmetic mean."""
    m = _as_map(m)
    means = m.mean(axis=1)
    # keep rows that are already constant bit-exact
    constant = np.all(m == m[:, :1], axis=1)
    means[constant] = m[constant, 0]
    return np.repeat(means[:, None], m.shape[1], axis=1).astype(m.dtype)


def is_row_constant(m: np.ndarray) -> bool:
    return bool(np.all(m == m[:, :1]))


def downsample_area(m: np.ndarray, factor: int) -> np.ndarray:
    """Average over non-overlapping factor x factor cells."""
    m = _as_map(m)
    if factor < 1:
        raise InvalidArgumentError(f"Factor must be positive, got {factor}.")
    height, width = m.shape
    if height % factor or width % factor:
        raise ShapeMismatchError(
            f"Map of shape {m.shape} is not divisible by factor {factor}."
        )
    cells = m.reshape(height // factor, factor, width // factor, factor)
    return cells.mean(axis=(1, 3))


def downsample_area_adjoint(grad: np.ndarray, factor: int) -> np.ndarray:
    spread = np.repeat(np.repeat(grad, factor, axis=0), factor, axis=1)
    return spread / (factor * factor)


def init_perspective_params(maps: Iterable[np.ndarray]) -> PerspectiveParams:
    """
    Initial parameters from training-set perspective values: beta at their
    mean, alpha = 4 / (max - min) so the near-linear part of the sigmoid
    covers the observed range, a = 1 and p0 = 0.

    Args:
        maps (Iterable[np.ndarray]): Raw perspective maps.

    Returns:
        PerspectiveParams: Initial values, alpha = 1 for a degenerate range.
    """
    values = [np.asarray(m, dtype=np.float64).ravel() for m in maps]
    if not values:
        raise InvalidArgumentError("At least one perspective map is required.")
    stacked = np.concatenate(values)
    spread = float(stacked.max() - stacked.min())
    alpha = 4.0 / spread if spread > 1e-12 else 1.0
    params = PerspectiveParams(
        alpha=alpha, beta=float(stacked.mean()), a=1.0, p0=0.0
    )
    logger.debug("Initial perspective parameters: %s", params)
    return params
