import copy
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple

import numpy as np

from exceptions import ShapeMismatchError
from networks.interfaces import Parameter
from networks.layers import (
    Conv2d,
    ConvTranspose2d,
    LeakyReLU,
    ReLU,
    Sequential,
)
from perspective import row_mean_collapse
from schemas import EncoderPathEnum, PENetConfigSchema

logger = logging.getLogger(__name__)

PENET_STRIDE = 2
PENET_PADDING = 1
PENET_DEPTH = 4


@dataclass
class PerspectiveScaler:
    """
    Affine map of raw perspective values onto [0, 1] fitted on training maps.

    A degenerate range keeps values as they are (lo = 0, span = 1).
    """

    lo: float = 0.0
    span: float = 1.0

    @classmethod
    def fit(cls, maps: Iterable[np.ndarray]) -> "PerspectiveScaler":
        values = [np.asarray(m, dtype=np.float64).ravel() for m in maps]
        if not values:
            return cls()
        stacked = np.concatenate(values)
        lo, hi = float(stacked.min()), float(stacked.max())
        if hi - lo <= 1e-12:
            return cls()
        return cls(lo=lo, span=hi - lo)

    def scale(self, m: np.ndarray) -> np.ndarray:
        m = np.asarray(m)
        return ((m - self.lo) / self.span).astype(m.dtype)

    def unscale(self, m: np.ndarray) -> np.ndarray:
        m = np.asarray(m)
        return (m * self.span + self.lo).astype(m.dtype)

    def as_dict(self) -> Dict[str, float]:
        return {"lo": self.lo, "span": self.span}


class PENet:
    """
    Perspective estimator: two interchangeable encoders (perspective map or
    image input) sharing one decoder back to a single-channel map.

    Every stage is a 4x4 convolution with stride 2 and padding 1, so each
    encoder stage halves and each decoder stage doubles the resolution.
    """

    def __init__(
        self,
        config: PENetConfigSchema,
        encoder_p: Sequential,
        encoder_i: Sequential,
        decoder: Sequential,
        scaler: PerspectiveScaler = None,
        seed: int = 0,
    ):
        self.config = config
        self.encoder_p = encoder_p
        self.encoder_i = encoder_i
        self.decoder = decoder
        self.scaler = scaler or PerspectiveScaler()
        self.seed = seed
        self.decoder_trained = False

    @property
    def downsampling(self) -> int:
        return PENET_STRIDE ** PENET_DEPTH

    def encoder(self, which: EncoderPathEnum) -> Sequential:
        if EncoderPathEnum(which) == EncoderPathEnum.PERSPECTIVE:
            return self.encoder_p
        return self.encoder_i

    def _check_input(self, x: np.ndarray, which: EncoderPathEnum) -> None:
        channels = self.encoder(which).layers[0].in_channels
        if x.ndim != 3 or x.shape[0] != channels:
            raise ShapeMismatchError(
                f"Encoder {EncoderPathEnum(which).value} expects "
                f"({channels}, H, W) input, got {x.shape}."
            )
        if x.shape[1] % self.downsampling or x.shape[2] % self.downsampling:
            raise ShapeMismatchError(
                f"Input sides must be divisible by {self.downsampling}, "
                f"got {x.shape[1:]}."
            )

    def forward(self, x: np.ndarray, which: EncoderPathEnum) -> np.ndarray:
        """
        Args:
            x (np.ndarray): (1, H, W) scaled perspective map for the P path
                or (C, H, W) image for the I path.
            which (EncoderPathEnum): Encoder to run.

        Returns:
            np.ndarray: (H, W) nonnegative map in scaled units.
        """
        self._check_input(x, which)
        latent = self.encoder(which).forward(x)
        return self.decoder.forward(latent)[0]

    def backward(self, grad: np.ndarray, which: EncoderPathEnum) -> np.ndarray:
        grad_latent = self.decoder.backward(grad[None])
        return self.encoder(which).backward(grad_latent)

    def estimate_perspective(self, image: np.ndarray) -> np.ndarray:
        """Unscaled, row-mean collapsed image-path estimate."""
        estimate = self.scaler.unscale(
            self.forward(image, EncoderPathEnum.IMAGE)
        )
        return row_mean_collapse(estimate)

    def named_parameters(self) -> List[Tuple[str, Parameter]]:
        return (
            self.encoder_p.named_parameters("encoder_p")
            + self.encoder_i.named_parameters("encoder_i")
            + self.decoder.named_parameters("decoder")
        )

    def parameters(self) -> List[Parameter]:
        return [parameter for _, parameter in self.named_parameters()]

    def zero_grad(self) -> None:
        for parameter in self.parameters():
            parameter.zero_grad()

    def activation_pattern(self, which: EncoderPathEnum) -> List[np.ndarray]:
        return (
            self.encoder(which).activation_pattern()
            + self.decoder.activation_pattern()
        )

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

    def copy(self) -> "PENet":
        return copy.deepcopy(self)

    def astype(self, dtype: np.dtype) -> "PENet":
        clone = self.copy()
        for parameter in clone.parameters():
            parameter.value = parameter.value.astype(dtype)
            parameter.grad = parameter.grad.astype(dtype)
        return clone


def _encoder(
    rng: np.random.Generator, in_channels: int, config: PENetConfigSchema
) -> Sequential:
    layers = []
    for out_channels in config.encoder_channels:
        layers.append(
            Conv2d.initialized(
                rng, in_channels, out_channels, config.kernel_size,
                stride=PENET_STRIDE, padding=PENET_PADDING,
            )
        )
        layers.append(LeakyReLU(config.leaky_slope))
        in_channels = out_channels
    return Sequential(layers)


def build_penet(config: PENetConfigSchema, seed: int = 0) -> PENet:
    """Seeded PENet with He-initialized weights and zero biases."""
    rng = np.random.default_rng(seed)
    encoder_p = _encoder(rng, 1, config)
    encoder_i = _encoder(rng, config.image_channels, config)

    layers = []
    in_channels = config.encoder_channels[-1]
    for out_channels in config.decoder_channels:
        layers.append(
            ConvTranspose2d.initialized(
                rng, in_channels, out_channels, config.kernel_size,
                stride=PENET_STRIDE, padding=PENET_PADDING,
            )
        )
        layers.append(ReLU())
        in_channels = out_channels
    penet = PENet(config, encoder_p, encoder_i, Sequential(layers), seed=seed)
    logger.debug(
        "Built PENet with encoder widths %s", config.encoder_channels
    )
    return penet


def penet_forward(
    penet: PENet, x: np.ndarray, which: EncoderPathEnum
) -> np.ndarray:
    return penet.forward(x, which)
