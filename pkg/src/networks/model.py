import copy
import logging
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from exceptions import ShapeMismatchError
from kernels import KernelDictionary, build_dictionary
from networks.interfaces import Parameter
from networks.layers import Conv2d, ReLU, Sequential
from networks.pgc import PGCBlock
from perspective import (
    PerspectiveParams,
    downsample_area,
    downsample_area_adjoint,
    init_perspective_params,
)
from schemas import NetworkConfigSchema

logger = logging.getLogger(__name__)

PGC_KERNEL_SIZE = 3
HEAD_WEIGHT_STD = 0.01
HEAD_BIAS = 0.01


class DensityNetwork:
    """
    Backbone, stacked PGC blocks sharing one perspective map, and a
    rectified 1x1 head producing a density map at half resolution.
    """

    def __init__(
        self,
        config: NetworkConfigSchema,
        dictionary: KernelDictionary,
        backbone: Sequential,
        blocks: List[PGCBlock],
        head: Sequential,
        seed: int = 0,
    ):
        self.config = config
        self.dictionary = dictionary
        self.backbone = backbone
        self.blocks = blocks
        self.head = head
        self.seed = seed
        self._feature_shape = None

    @property
    def stride(self) -> int:
        return self.config.feature_stride

    def _check_inputs(self, image: np.ndarray, p: np.ndarray) -> None:
        if image.ndim != 3 or image.shape[0] != self.config.input_channels:
            raise ShapeMismatchError(
                f"Image must have shape ({self.config.input_channels}, H, W), "
                f"got {image.shape}."
            )
        if p.shape != image.shape[1:]:
            raise ShapeMismatchError(
                f"Perspective shape {p.shape} does not match image shape "
                f"{image.shape[1:]}."
            )
        if image.shape[1] % self.stride or image.shape[2] % self.stride:
            raise ShapeMismatchError(
                f"Image sides must be divisible by {self.stride}, "
                f"got {image.shape[1:]}."
            )

    def forward(self, image: np.ndarray, p: np.ndarray) -> np.ndarray:
        """
        Predict a density map.

        Args:
            image (np.ndarray): (C_in, H, W) image.
            p (np.ndarray): (H, W) perspective map at image resolution.

        Returns:
            np.ndarray: (H / 2, W / 2) nonnegative density map.
        """
        self._check_inputs(image, p)
        features = self.backbone.forward(image)
        p_features = downsample_area(p, self.stride).astype(features.dtype)
        for block in self.blocks:
            features = block.forward(features, p_features)
        self._feature_shape = p_features.shape
        return self.head.forward(features)[0]

    def backward(self, grad: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Accumulate parameter gradients of the last forward pass.

        Returns:
            Tuple[np.ndarray, np.ndarray]: Gradients on the image and on the
            image-resolution perspective map.
        """
        grad_features = self.head.backward(grad[None])
        grad_p = np.zeros(self._feature_shape)
        for block in reversed(self.blocks):
            grad_features, grad_block_p = block.backward(grad_features)
            grad_p += grad_block_p
        grad_image = self.backbone.backward(grad_features)
        return grad_image, downsample_area_adjoint(grad_p, self.stride)

    def named_parameters(self) -> List[Tuple[str, Parameter]]:
        named = self.backbone.named_parameters("backbone")
        for index, block in enumerate(self.blocks):
            named += block.named_parameters(f"blocks.{index}")
        named += self.head.named_parameters("head")
        return named

    def parameters(self) -> List[Parameter]:
        return [parameter for _, parameter in self.named_parameters()]

    def parameter_count(self) -> int:
        return sum(parameter.size for parameter in self.parameters())

    def zero_grad(self) -> None:
        for parameter in self.parameters():
            parameter.zero_grad()

    def activation_pattern(self) -> List[np.ndarray]:
        pattern = self.backbone.activation_pattern()
        for block in self.blocks:
            pattern += block.activation_pattern()
        return pattern + self.head.activation_pattern()

    def state_dict(self) -> Dict[str, np.ndarray]:
        return {
            name: parameter.value.copy()
            for name, parameter in self.named_parameters()
        }

    def load_state_dict(self, state: Dict[str, np.ndarray]) -> None:
        for name, parameter in self.named_parameters():
            if name not in state:
                raise ShapeMismatchError(f"Missing parameter {name}.")
            value = np.asarray(state[name])
            if value.shape != parameter.value.shape:
                raise ShapeMismatchError(
                    f"Parameter {name} has shape {value.shape}, expected "
                    f"{parameter.value.shape}."
                )
            parameter.value = value.astype(parameter.value.dtype)

    def set_perspective_params(self, params: PerspectiveParams) -> None:
        for block in self.blocks:
            block.set_perspective_params(params)

    def copy(self) -> "DensityNetwork":
        return copy.deepcopy(self)

    def astype(self, dtype: np.dtype) -> "DensityNetwork":
        """Deep copy with every parameter and gradient cast to dtype."""
        clone = self.copy()
        for parameter in clone.parameters():
            parameter.value = parameter.value.astype(dtype)
            parameter.grad = parameter.grad.astype(dtype)
        return clone


def forward(
    net: DensityNetwork, image: np.ndarray, p: np.ndarray
) -> np.ndarray:
    return net.forward(image, p)


def expected_parameter_count(config: NetworkConfigSchema) -> int:
    """Closed-form parameter count from the channel arithmetic."""
    total = 0
    in_channels = config.input_channels
    for out_channels in config.backbone_channels:
        total += out_channels * in_channels * 9 + out_channels
        in_channels = out_channels
    for index in range(config.num_pgc_blocks):
        block_in = config.block_input_channels(index)
        total += config.block_out_channels * block_in * 9
        total += config.block_out_channels + 4
    return total + config.head_input_channels + 1


def _positive_head(rng: np.random.Generator, in_channels: int) -> Conv2d:
    # nonnegative weights and a positive bias keep the rectified head
    # active at initialization
    weight = np.abs(rng.standard_normal((1, in_channels, 1, 1)))
    return Conv2d(
        (weight * HEAD_WEIGHT_STD).astype(np.float32),
        np.full(1, HEAD_BIAS, dtype=np.float32),
    )


def build_toy_net(
    config: NetworkConfigSchema,
    seed: int = 0,
    dictionary: Optional[KernelDictionary] = None,
    perspective_maps: Optional[Iterable[np.ndarray]] = None,
) -> DensityNetwork:
    """
    Seeded density network.

    The backbone is a stack of 3x3 convolutions with rectifiers where the
    second layer (or the only one) halves the resolution. PGC convolutions
    start from N(0, pgc_weight_std^2), other weights from He init, biases
    from zero. The head starts from half-normal weights scaled by
    HEAD_WEIGHT_STD and a HEAD_BIAS bias so its first outputs are positive.
    Perspective scalars start at a = 1, p0 = 0 with alpha, beta fitted to
    perspective_maps when given; with smoothing disabled a = 0 and the
    scalars are frozen.

    Args:
        config (NetworkConfigSchema): Architecture.
        seed (int): Weight seed.
        dictionary (KernelDictionary, optional): Shared basis; built from
            config.dictionary when omitted.
        perspective_maps (Iterable[np.ndarray], optional): Training
            perspective maps for the alpha/beta initialization.

    Returns:
        DensityNetwork: Bit-identical for identical config and seed.
    """
    rng = np.random.default_rng(seed)
    dictionary = dictionary or build_dictionary(config.dictionary)

    layers = []
    in_channels = config.input_channels
    downsample_at = min(1, len(config.backbone_channels) - 1)
    for index, out_channels in enumerate(config.backbone_channels):
        stride = config.feature_stride if index == downsample_at else 1
        layers.append(
            Conv2d.initialized(
                rng, in_channels, out_channels, 3, stride=stride, padding=1
            )
        )
        layers.append(ReLU())
        in_channels = out_channels

    if perspective_maps is not None:
        perspective = init_perspective_params(perspective_maps)
    else:
        perspective = PerspectiveParams()
    if not config.smoothing:
        perspective = PerspectiveParams(
            alpha=perspective.alpha, beta=perspective.beta, a=0.0, p0=0.0
        )

    blocks = []
    for index in range(config.num_pgc_blocks):
        conv = Conv2d.initialized(
            rng,
            config.block_input_channels(index),
            config.block_out_channels,
            PGC_KERNEL_SIZE,
            padding=config.dilation,
            dilation=config.dilation,
            std=config.pgc_weight_std,
        )
        blocks.append(
            PGCBlock(
                conv,
                perspective,
                dictionary,
                smoothing_padding=config.smoothing_padding,
                trainable_perspective=config.smoothing,
            )
        )

    head = Sequential(
        [_positive_head(rng, config.head_input_channels), ReLU()]
    )
    net = DensityNetwork(
        config, dictionary, Sequential(layers), blocks, head, seed=seed
    )
    logger.debug(
        "Built network with %d blocks and %d parameters",
        len(blocks), net.parameter_count(),
    )
    return net
