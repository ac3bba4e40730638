import logging
from typing import List, Optional, Tuple

import numpy as np

from exceptions import ShapeMismatchError
from filters import filter_approx_backward, filter_approx_forward
from kernels import KernelDictionary
from networks.interfaces import Parameter
from networks.layers import Conv2d
from perspective import PerspectiveParams, blur_backward, blur_trace
from schemas import PaddingModeEnum

logger = logging.getLogger(__name__)

PERSPECTIVE_FIELDS = ("alpha", "beta", "a", "p0")


class PGCBlock:
    """
    Perspective-guided smoothing followed by a 3x3 dilation-2 convolution,
    concatenated with the block input: out = [x || conv(smooth(x, sigma(p)))].

    The perspective scalars are 0-d Parameters so they train alongside the
    convolution; they are frozen when smoothing is disabled.
    """

    def __init__(
        self,
        conv: Conv2d,
        perspective: PerspectiveParams,
        dictionary: KernelDictionary,
        smoothing_padding: PaddingModeEnum = PaddingModeEnum.REPLICATE,
        trainable_perspective: bool = True,
        threads: Optional[int] = None,
    ):
        self.conv = conv
        self.dictionary = dictionary
        self.smoothing_padding = smoothing_padding
        self.threads = threads
        dtype = conv.weight.value.dtype
        for field in PERSPECTIVE_FIELDS:
            setattr(
                self,
                field,
                Parameter(
                    field,
                    np.array(getattr(perspective, field), dtype=dtype),
                    decay=False,
                    trainable=trainable_perspective,
                ),
            )
        self._cache = None

    @property
    def in_channels(self) -> int:
        return self.conv.in_channels

    @property
    def out_channels(self) -> int:
        return self.conv.in_channels + self.conv.out_channels

    @property
    def perspective_params(self) -> PerspectiveParams:
        return PerspectiveParams(
            **{f: float(getattr(self, f).value) for f in PERSPECTIVE_FIELDS}
        )

    def set_perspective_params(self, params: PerspectiveParams) -> None:
        for field in PERSPECTIVE_FIELDS:
            parameter = getattr(self, field)
            parameter.value = np.array(
                getattr(params, field), dtype=parameter.value.dtype
            )

    def forward(self, x: np.ndarray, p: np.ndarray) -> np.ndarray:
        """
        Args:
            x (np.ndarray): (C_in, H, W) features.
            p (np.ndarray): (H, W) perspective map at feature resolution.

        Returns:
            np.ndarray: (C_in + C_conv, H, W) concatenated features.
        """
        if p.shape != x.shape[1:]:
            raise ShapeMismatchError(
                f"Perspective shape {p.shape} does not match feature shape "
                f"{x.shape[1:]}."
            )
        params = self.perspective_params
        trace = blur_trace(p, params)
        smoothed, filter_cache = filter_approx_forward(
            x, trace.blur, self.dictionary, self.smoothing_padding,
            self.threads,
        )
        y = self.conv.forward(smoothed)
        self._cache = (params, trace, filter_cache, x.shape[0])
        return np.concatenate([x, y.astype(x.dtype)], axis=0)

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Accumulate parameter gradients.

        Returns:
            Tuple[np.ndarray, np.ndarray]: Gradients on the block input and on
            the perspective map.
        """
        params, trace, filter_cache, channels = self._cache
        grad_smoothed = self.conv.backward(grad[channels:])
        grad_x, grad_sigma = filter_approx_backward(
            filter_cache, grad_smoothed, self.threads
        )
        grads, grad_p = blur_backward(trace, params, grad_sigma)
        for field in PERSPECTIVE_FIELDS:
            getattr(self, field).accumulate(getattr(grads, field))
        grad_x = grad_x + grad[:channels]
        return grad_x.astype(grad.dtype), grad_p

    def parameters(self) -> List[Parameter]:
        perspective = [getattr(self, f) for f in PERSPECTIVE_FIELDS]
        return self.conv.parameters() + perspective

    def named_parameters(
        self, prefix: str = ""
    ) -> List[Tuple[str, Parameter]]:
        lead = f"{prefix}." if prefix else ""
        named = [(f"{lead}conv.{p.name}", p) for p in self.conv.parameters()]
        named += [(f"{lead}{f}", getattr(self, f)) for f in PERSPECTIVE_FIELDS]
        return named

    def activation_pattern(self) -> List[np.ndarray]:
        """Hinge, identity-bypass and clamp regions of the last blur map."""
        _, trace, filter_cache, _ = self._cache
        sigma = trace.blur
        return [
            trace.active,
            filter_cache.coefficients.identity_mask,
            sigma < self.dictionary.sigma_min,
            sigma > self.dictionary.sigma_max,
        ]

    def kink_distance(self) -> float:
        """
        Smallest distance of the last blur map to a nondifferentiable point:
        the hinge at 0 and the clamp bounds of the dictionary.
        """
        _, trace, _, _ = self._cache
        sigma = trace.blur.astype(np.float64)
        distances = [
            np.abs(trace.pre_activation).min(),
            np.abs(sigma - self.dictionary.sigma_min).min(),
            np.abs(sigma - self.dictionary.sigma_max).min(),
        ]
        return float(min(distances))


def pgc_block_forward(
    x: np.ndarray,
    p: np.ndarray,
    block: PGCBlock,
) -> np.ndarray:
    return block.forward(x, p)


def pgc_block_backward(
    block: PGCBlock, grad_out: np.ndarray
) -> Tuple[np.ndarray, dict, np.ndarray]:
    """
    Backward of the last forward; returns (grad_x, parameter grads by name,
    grad_p) with gradients zeroed before accumulation.
    """
    for parameter in block.parameters():
        parameter.zero_grad()
    grad_x, grad_p = block.backward(grad_out)
    grads = {
        name: parameter.grad.copy()
        for name, parameter in block.named_parameters()
    }
    return grad_x, grads, grad_p
