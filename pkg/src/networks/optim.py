from typing import Dict, List

import numpy as np

from exceptions import NumericalFailureError
from networks.interfaces import Parameter
from schemas import TrainerConfigSchema


class SGD:
    """
    Stochastic gradient descent with momentum and weight decay.

    velocity = momentum * velocity + lr * (grad + weight_decay * value)
    value -= velocity

    Weight decay is skipped for parameters flagged decay=False (biases and
    perspective scalars); frozen parameters are never touched.
    """

    def __init__(
        self,
        parameters: List[Parameter],
        learning_rate: float,
        momentum: float = 0.0,
        weight_decay: float = 0.0,
    ):
        self.parameters = [p for p in parameters if p.trainable]
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.weight_decay = weight_decay
        self.velocity: Dict[int, np.ndarray] = {
            id(p): np.zeros_like(p.value) for p in self.parameters
        }

    @classmethod
    def from_config(
        cls, parameters: List[Parameter], config: TrainerConfigSchema
    ) -> "SGD":
        return cls(
            parameters,
            learning_rate=config.learning_rate,
            momentum=config.momentum,
            weight_decay=config.weight_decay,
        )

    def zero_grad(self) -> None:
        for parameter in self.parameters:
            parameter.zero_grad()

    def step(self) -> None:
        for parameter in self.parameters:
            update = parameter.grad
            if parameter.decay and self.weight_decay:
                update = update + self.weight_decay * parameter.value
            velocity = (
                self.momentum * self.velocity[id(parameter)]
                + self.learning_rate * update
            ).astype(parameter.value.dtype)
            self.velocity[id(parameter)] = velocity
            parameter.value = parameter.value - velocity
            if not np.all(np.isfinite(parameter.value)):
                raise NumericalFailureError(
                    f"Parameter {parameter.name} became non-finite."
                )
