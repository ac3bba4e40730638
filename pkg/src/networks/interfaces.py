from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import List, Optional

import numpy as np


@dataclass
class Parameter:
    """
    A trainable array and its accumulated gradient.

    Attributes:
        name (str): Name relative to the owning layer.
        value (np.ndarray): Current value; scalars are 0-d arrays.
        grad (np.ndarray): Gradient accumulated by backward passes.
        decay (bool): Whether weight decay applies (weights yes, biases and
            perspective scalars no).
        trainable (bool): Frozen parameters keep their value in every step.
    """

    name: str
    value: np.ndarray
    grad: Optional[np.ndarray] = None
    decay: bool = True
    trainable: bool = True

    def __post_init__(self) -> None:
        self.value = np.asarray(self.value)
        if self.grad is None:
            self.grad = np.zeros_like(self.value)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.value)

    def accumulate(self, grad: np.ndarray) -> None:
        self.grad = self.grad + np.asarray(grad, dtype=self.grad.dtype)

    def astype(self, dtype: np.dtype) -> "Parameter":
        return Parameter(
            name=self.name,
            value=self.value.astype(dtype),
            grad=self.grad.astype(dtype),
            decay=self.decay,
            trainable=self.trainable,
        )

    @property
    def size(self) -> int:
        return self.value.size


class LayerInterface(ABC):
    """A differentiable map of one (C, H, W) tensor to another."""

    @abstractmethod
    def forward(self, x: np.ndarray) -> np.ndarray:
        """
        Compute the layer output and keep what backward needs.

        :param x: Input tensor of shape (C, H, W).
        :return: Output tensor.
        """
        pass

    @abstractmethod
    def backward(self, grad: np.ndarray) -> np.ndarray:
        """
        Accumulate parameter gradients and return the input gradient.

        :param grad: Gradient of the loss with respect to the last output.
        :return: Gradient with respect to the last input.
        """
        pass

    def parameters(self) -> List[Parameter]:
        return []

    def activation_pattern(self) -> List[np.ndarray]:
        """Masks of the piecewise-linear regions hit by the last input."""
        return []
