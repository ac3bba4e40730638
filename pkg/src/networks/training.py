import logging
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from tqdm import tqdm

from config import get_settings
from density import Scene, block_sum_downsample, count
from exceptions import EmptyDatasetError, NumericalFailureError
from networks.interfaces import Parameter
from networks.model import DensityNetwork
from networks.optim import SGD
from schemas import TrainerConfigSchema

logger = logging.getLogger(__name__)

T = TypeVar("T")


def density_loss(
    pred: np.ndarray, target: np.ndarray, mask: Optional[np.ndarray] = None
) -> Tuple[float, np.ndarray]:
    """
    Half the squared L2 distance and its gradient with respect to pred.

    Args:
        pred (np.ndarray): Prediction.
        target (np.ndarray): Target of the same shape.
        mask (np.ndarray, optional): Boolean region the loss is restricted to.

    Returns:
        Tuple[float, np.ndarray]: Loss (accumulated in float64) and gradient
        in the prediction dtype.
    """
    diff = pred.astype(np.float64) - target.astype(np.float64)
    if mask is not None:
        diff = np.where(mask, diff, 0.0)
    return 0.5 * float(np.sum(diff ** 2)), diff.astype(pred.dtype)


def feature_target(scene: Scene, stride: int) -> np.ndarray:
    """Ground-truth density pooled to feature resolution, count preserving."""
    return block_sum_downsample(scene.gt_density, stride)


def feature_roi(scene: Scene, stride: int) -> Optional[np.ndarray]:
    if scene.roi is None:
        return None
    return block_sum_downsample(scene.roi.astype(np.float64), stride) > 0


def run_epochs(
    samples: Sequence[T],
    step: Callable[[T, bool], float],
    parameters: List[Parameter],
    config: TrainerConfigSchema,
    desc: str = "train",
) -> List[float]:
    """
    Batch-size-one SGD loop shared by every trainer.

    Each epoch visits the samples in a permutation drawn from a generator
    seeded with config.seed; step(sample, flip) runs forward and backward
    and returns the sample loss.

    Returns:
        List[float]: Mean sample loss per epoch.

    Raises:
        EmptyDatasetError: If there are no samples.
        NumericalFailureError: If a loss or parameter turns non-finite.
    """
    if len(samples) == 0:
        raise EmptyDatasetError()
    optimizer = SGD.from_config(parameters, config)
    rng = np.random.default_rng(config.seed)
    show_progress = get_settings().PROGRESS_BARS

    loss_curve = []
    epochs = tqdm(
        range(config.epochs), desc=desc, disable=not show_progress, leave=False
    )
    for epoch in epochs:
        order = rng.permutation(len(samples))
        losses = []
        for index in order:
            flip = bool(config.hflip and rng.random() < 0.5)
            optimizer.zero_grad()
            loss = step(samples[index], flip)
            if not np.isfinite(loss):
                raise NumericalFailureError(
                    f"{desc}: loss became {loss} at epoch {epoch + 1}."
                )
            optimizer.step()
            losses.append(loss)
        loss_curve.append(float(np.mean(losses)))
        epochs.set_postfix(loss=f"{loss_curve[-1]:.4g}")
        logger.info(
            "%s epoch %d/%d loss %.6g",
            desc, epoch + 1, config.epochs, loss_curve[-1],
        )
    return loss_curve


def flip_horizontal(
    array: Optional[np.ndarray], flip: bool
) -> Optional[np.ndarray]:
    if array is None or not flip:
        return array
    return np.ascontiguousarray(array[..., ::-1])


def train(
    net: DensityNetwork,
    dataset: Sequence[Scene],
    config: TrainerConfigSchema,
    perspectives: Optional[Sequence[np.ndarray]] = None,
) -> Tuple[DensityNetwork, List[float]]:
    """
    Fit the density network in place.

    Args:
        net (DensityNetwork): Network to train.
        dataset (Sequence[Scene]): Training scenes.
        config (TrainerConfigSchema): Optimizer and schedule.
        perspectives (Sequence[np.ndarray], optional): Perspective maps to
            guide with instead of the scenes' ground truth.

    Returns:
        Tuple[DensityNetwork, List[float]]: The network and its per-epoch
        loss curve.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError()
    guidance = perspectives
    if guidance is None:
        guidance = [scene.gt_perspective for scene in dataset]
    samples = [
        (
            scene.image,
            guide,
            feature_target(scene, net.stride),
            feature_roi(scene, net.stride),
        )
        for scene, guide in zip(dataset, guidance)
    ]

    def step(sample, flip: bool) -> float:
        image, p, target, roi = (
            flip_horizontal(item, flip) for item in sample
        )
        pred = net.forward(image, p)
        loss, grad = density_loss(pred, target, roi)
        net.backward(grad)
        return loss

    loss_curve = run_epochs(
        samples, step, net.parameters(), config, desc="density"
    )
    return net, loss_curve


def predict_count(
    net: DensityNetwork, scene: Scene, perspective: Optional[np.ndarray] = None
) -> Tuple[float, float]:
    """Predicted and ground-truth counts of one scene, inside its ROI."""
    p = scene.gt_perspective if perspective is None else perspective
    pred = net.forward(scene.image, p)
    return (
        count(pred, feature_roi(scene, net.stride)),
        count(scene.gt_density, scene.roi),
    )


def mean_density_loss(
    net: DensityNetwork,
    dataset: Sequence[Scene],
    perspectives: Optional[Sequence[np.ndarray]] = None,
) -> float:
    """Mean per-scene density loss without touching gradients."""
    if len(dataset) == 0:
        raise EmptyDatasetError()
    losses = []
    for index, scene in enumerate(dataset):
        p = (
            scene.gt_perspective if perspectives is None
            else perspectives[index]
        )
        pred = net.forward(scene.image, p)
        losses.append(
            density_loss(
                pred,
                feature_target(scene, net.stride),
                feature_roi(scene, net.stride),
            )[0]
        )
    return float(np.mean(losses))
