from typing import Iterable, List, Optional, Tuple

import numpy as np

from exceptions import InvalidArgumentError, ShapeMismatchError
from filters.convolution import (
    conv_output_size,
    fold,
    pad_spatial,
    pad_spatial_adjoint,
    unfold,
)
from networks.interfaces import LayerInterface, Parameter
from schemas import PaddingModeEnum


def he_normal(
    rng: np.random.Generator,
    shape: Tuple[int, ...],
    fan_in: int,
    dtype: np.dtype = np.float32,
) -> np.ndarray:
    """Zero-mean normal weights with std sqrt(2 / fan_in)."""
    return (rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)).astype(dtype)


def _check_channels(x: np.ndarray, expected: int, layer: str) -> None:
    if x.ndim != 3:
        raise ShapeMismatchError(
            f"{layer} expects a (C, H, W) tensor, got shape {x.shape}."
        )
    if x.shape[0] != expected:
        raise ShapeMismatchError(
            f"{layer} expects {expected} input channels, got {x.shape[0]}."
        )


class Conv2d(LayerInterface):
    """
    Cross-correlation with zero padding, stride and dilation.

    Weights have shape (out_channels, in_channels, K, K).
    """

    def __init__(
        self,
        weight: np.ndarray,
        bias: np.ndarray,
        stride: int = 1,
        padding: int = 0,
        dilation: int = 1,
    ):
        weight = np.asarray(weight)
        if weight.ndim != 4 or weight.shape[2] != weight.shape[3]:
            raise InvalidArgumentError(
                f"Conv weights must be (out, in, K, K), got {weight.shape}."
            )
        if np.shape(bias) != (weight.shape[0],):
            raise ShapeMismatchError(
                f"Bias shape {np.shape(bias)} does not match "
                f"{weight.shape[0]} output channels."
            )
        self.weight = Parameter("weight", weight)
        self.bias = Parameter("bias", bias, decay=False)
        self.stride = stride
        self.padding = padding
        self.dilation = dilation
        self._cache = None

    @classmethod
    def initialized(
        cls,
        rng: np.random.Generator,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        stride: int = 1,
        padding: int = 0,
        dilation: int = 1,
        std: Optional[float] = None,
        dtype: np.dtype = np.float32,
    ) -> "Conv2d":
        """He-initialized weights, or N(0, std^2) when std is given."""
        shape = (out_channels, in_channels, kernel_size, kernel_size)
        if std is None:
            fan_in = in_channels * kernel_size ** 2
            weight = he_normal(rng, shape, fan_in, dtype)
        else:
            weight = (rng.standard_normal(shape) * std).astype(dtype)
        return cls(
            weight,
            np.zeros(out_channels, dtype=dtype),
            stride=stride,
            padding=padding,
            dilation=dilation,
        )

    @property
    def in_channels(self) -> int:
        return self.weight.value.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weight.value.shape[0]

    @property
    def kernel_size(self) -> int:
        return self.weight.value.shape[2]

    def forward(self, x: np.ndarray) -> np.ndarray:
        _check_channels(x, self.in_channels, "Conv2d")
        k = self.kernel_size
        padded = pad_spatial(x, self.padding, PaddingModeEnum.ZERO)
        s, d = self.stride, self.dilation
        out_h = conv_output_size(padded.shape[1], k, s, d)
        out_w = conv_output_size(padded.shape[2], k, s, d)
        cols = unfold(
            padded, k, (out_h, out_w), self.stride, self.dilation
        ).reshape(self.in_channels * k * k, out_h * out_w)
        weights = self.weight.value.reshape(self.out_channels, -1)
        out = weights @ cols + self.bias.value[:, None]
        self._cache = (cols, padded.shape, (out_h, out_w))
        return out.reshape(self.out_channels, out_h, out_w)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        cols, padded_shape, (out_h, out_w) = self._cache
        k = self.kernel_size
        flat = grad.reshape(self.out_channels, out_h * out_w)
        self.weight.accumulate(
            (flat @ cols.T).reshape(self.weight.value.shape)
        )
        self.bias.accumulate(flat.sum(axis=1))

        weights = self.weight.value.reshape(self.out_channels, -1)
        grad_cols = (weights.T @ flat).reshape(
            self.in_channels, k, k, out_h, out_w
        )
        grad_padded = fold(grad_cols, padded_shape, self.stride, self.dilation)
        return pad_spatial_adjoint(
            grad_padded, self.padding, PaddingModeEnum.ZERO
        )

    def parameters(self) -> List[Parameter]:
        return [self.weight, self.bias]


class ConvTranspose2d(LayerInterface):
    """
    Transposed convolution: the input-gradient map of a strided Conv2d.

    Weights have shape (in_channels, out_channels, K, K); the output side
    is (H - 1) * stride - 2 * padding + K.
    """

    def __init__(
        self,
        weight: np.ndarray,
        bias: np.ndarray,
        stride: int = 1,
        padding: int = 0,
    ):
        weight = np.asarray(weight)
        if weight.ndim != 4 or weight.shape[2] != weight.shape[3]:
            raise InvalidArgumentError(
                f"Transposed conv weights must be (in, out, K, K), "
                f"got {weight.shape}."
            )
        if np.shape(bias) != (weight.shape[1],):
            raise ShapeMismatchError(
                f"Bias shape {np.shape(bias)} does not match "
                f"{weight.shape[1]} output channels."
            )
        self.weight = Parameter("weight", weight)
        self.bias = Parameter("bias", bias, decay=False)
        self.stride = stride
        self.padding = padding
        self._cache = None

    @classmethod
    def initialized(
        cls,
        rng: np.random.Generator,
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        stride: int = 1,
        padding: int = 0,
        dtype: np.dtype = np.float32,
    ) -> "ConvTranspose2d":
        # each output sees about in_channels * (K / stride)^2 inputs
        fan_in = max(in_channels * (kernel_size // stride) ** 2, 1)
        shape = (in_channels, out_channels, kernel_size, kernel_size)
        return cls(
            he_normal(rng, shape, fan_in, dtype),
            np.zeros(out_channels, dtype=dtype),
            stride=stride,
            padding=padding,
        )

    @property
    def in_channels(self) -> int:
        return self.weight.value.shape[0]

    @property
    def out_channels(self) -> int:
        return self.weight.value.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weight.value.shape[2]

    def forward(self, x: np.ndarray) -> np.ndarray:
        _check_channels(x, self.in_channels, "ConvTranspose2d")
        k, s, p = self.kernel_size, self.stride, self.padding
        _, height, width = x.shape
        flat_x = x.reshape(self.in_channels, height * width)
        weights = self.weight.value.reshape(self.in_channels, -1)
        cols = (weights.T @ flat_x).reshape(
            self.out_channels, k, k, height, width
        )
        full_shape = (
            self.out_channels, (height - 1) * s + k, (width - 1) * s + k
        )
        full = fold(cols, full_shape, s)
        out = full[:, p:full_shape[1] - p, p:full_shape[2] - p]
        if out.shape[1] < 1 or out.shape[2] < 1:
            raise ShapeMismatchError(
                f"Padding {p} leaves no output for input shape {x.shape}."
            )
        self._cache = (flat_x, (height, width))
        return out + self.bias.value[:, None, None]

    def backward(self, grad: np.ndarray) -> np.ndarray:
        flat_x, (height, width) = self._cache
        k, s = self.kernel_size, self.stride
        grad_full = pad_spatial(grad, self.padding, PaddingModeEnum.ZERO)
        grad_cols = unfold(grad_full, k, (height, width), s).reshape(
            self.out_channels * k * k, height * width
        )
        self.weight.accumulate(
            (flat_x @ grad_cols.T).reshape(self.weight.value.shape)
        )
        self.bias.accumulate(grad.sum(axis=(1, 2)))
        weights = self.weight.value.reshape(self.in_channels, -1)
        return (weights @ grad_cols).reshape(self.in_channels, height, width)

    def parameters(self) -> List[Parameter]:
        return [self.weight, self.bias]


class ReLU(LayerInterface):

    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, 0).astype(x.dtype)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return np.where(self._mask, grad, 0).astype(grad.dtype)

    def activation_pattern(self) -> List[np.ndarray]:
        return [self._mask]


class LeakyReLU(LayerInterface):

    def __init__(self, slope: float = 0.2):
        self.slope = slope
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return np.where(self._mask, x, self.slope * x).astype(x.dtype)

    def backward(self, grad: np.ndarray) -> np.ndarray:
        return np.where(self._mask, grad, self.slope * grad).astype(grad.dtype)

    def activation_pattern(self) -> List[np.ndarray]:
        return [self._mask]


class Sequential(LayerInterface):

    def __init__(self, layers: Iterable[LayerInterface]):
        self.layers = list(layers)

    def forward(self, x: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad: np.ndarray) -> np.ndarray:
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad

    def parameters(self) -> List[Parameter]:
        return [p for _, p in self.named_parameters()]

    def named_parameters(
        self, prefix: str = ""
    ) -> List[Tuple[str, Parameter]]:
        named = []
        for index, layer in enumerate(self.layers):
            for parameter in layer.parameters():
                name = f"{index}.{parameter.name}"
                if prefix:
                    name = f"{prefix}.{name}"
                named.append((name, parameter))
        return named

    def activation_pattern(self) -> List[np.ndarray]:
        return [m for layer in self.layers for m in layer.activation_pattern()]
