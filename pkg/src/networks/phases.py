import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from density import Scene, mae_mse
from exceptions import EmptyDatasetError, MissingDecoderError
from networks.gradcheck import (
    GradientProbe,
    check_gradients,
    near_kink_parameters,
)
from networks.model import DensityNetwork
from networks.penet import PENet, PerspectiveScaler, build_penet
from networks.training import (
    flip_horizontal,
    density_loss,
    feature_roi,
    feature_target,
    mean_density_loss,
    predict_count,
    run_epochs,
    train,
)
from perspective import row_mean_collapse
from schemas import (
    EncoderPathEnum,
    GradReportSchema,
    PENetConfigSchema,
    Phase3ConfigSchema,
    Phase3ModeEnum,
    PhaseReportSchema,
    TrainerConfigSchema,
)

logger = logging.getLogger(__name__)

PERSPECTIVE = EncoderPathEnum.PERSPECTIVE
IMAGE = EncoderPathEnum.IMAGE


def _reconstruction_metrics(
    penet: PENet,
    inputs: Sequence[np.ndarray],
    targets: Sequence[np.ndarray],
    which: EncoderPathEnum,
) -> Tuple[float, float, float]:
    """Pixel MAE, pixel RMSE and mean loss in scaled units."""
    errors, losses = [], []
    for x, target in zip(inputs, targets):
        pred = penet.forward(x, which)
        losses.append(density_loss(pred, target)[0])
        errors.append((pred.astype(np.float64) - target).ravel())
    diff = np.concatenate(errors)
    return (
        float(np.mean(np.abs(diff))),
        float(np.sqrt(np.mean(diff ** 2))),
        float(np.mean(losses)),
    )


def _scaled_targets(
    penet: PENet, maps: Sequence[np.ndarray]
) -> List[np.ndarray]:
    return [
        penet.scaler.scale(np.asarray(m, dtype=np.float32)) for m in maps
    ]


def train_phase1(
    maps: Sequence[np.ndarray],
    config: PENetConfigSchema,
    trainer: TrainerConfigSchema,
    penet: Optional[PENet] = None,
) -> Tuple[PENet, PhaseReportSchema]:
    """
    Perspective-to-perspective reconstruction: fits the scaler on the maps
    and trains the perspective encoder together with the decoder.

    Args:
        maps (Sequence[np.ndarray]): Raw (H, W) perspective maps.
        config (PENetConfigSchema): Architecture, used when penet is None.
        trainer (TrainerConfigSchema): Optimizer and schedule; its seed
            also seeds a freshly built PENet.
        penet (PENet, optional): Network to continue training.

    Returns:
        Tuple[PENet, PhaseReportSchema]: Trained PENet with decoder_trained
        set and the reconstruction metrics in scaled units.

    Raises:
        EmptyDatasetError: If no maps are given.
    """
    if len(maps) == 0:
        raise EmptyDatasetError("Phase 1 needs at least one perspective map.")
    penet = penet or build_penet(config, seed=trainer.seed)
    penet.scaler = PerspectiveScaler.fit(maps)
    targets = _scaled_targets(penet, maps)
    inputs = [target[None] for target in targets]

    def step(index: int, flip: bool) -> float:
        x = flip_horizontal(inputs[index], flip)
        target = flip_horizontal(targets[index], flip)
        pred = penet.forward(x, PERSPECTIVE)
        loss, grad = density_loss(pred, target)
        penet.backward(grad, PERSPECTIVE)
        return loss

    parameters = (
        penet.encoder_p.parameters() + penet.decoder.parameters()
    )
    loss_curve = run_epochs(
        list(range(len(maps))), step, parameters, trainer, desc="penet-p2p"
    )
    penet.decoder_trained = True

    mae, mse, final_loss = _reconstruction_metrics(
        penet, inputs, targets, PERSPECTIVE
    )
    report = PhaseReportSchema(
        phase=1,
        epochs=trainer.epochs,
        mae=mae,
        mse=mse,
        loss_curve=loss_curve,
        final_loss=final_loss,
    )
    logger.info("Phase 1 reconstruction MAE %.4f MSE %.4f", mae, mse)
    return penet, report


def train_phase2(
    pairs: Sequence[Tuple[np.ndarray, np.ndarray]],
    penet: PENet,
    trainer: TrainerConfigSchema,
) -> Tuple[PENet, PhaseReportSchema]:
    """
    Image-to-perspective training of the image encoder against the frozen
    phase-1 decoder. Targets are scaled with the phase-1 scaler.

    Raises:
        MissingDecoderError: If phase 1 has not trained the decoder.
        EmptyDatasetError: If no pairs are given.
    """
    if not penet.decoder_trained:
        raise MissingDecoderError()
    if len(pairs) == 0:
        raise EmptyDatasetError("Phase 2 needs at least one image/map pair.")
    images = [np.asarray(image) for image, _ in pairs]
    targets = _scaled_targets(penet, [m for _, m in pairs])

    def step(index: int, flip: bool) -> float:
        penet.zero_grad()
        image = flip_horizontal(images[index], flip)
        target = flip_horizontal(targets[index], flip)
        pred = penet.forward(image, IMAGE)
        loss, grad = density_loss(pred, target)
        penet.backward(grad, IMAGE)
        return loss

    loss_curve = run_epochs(
        list(range(len(pairs))),
        step,
        penet.encoder_i.parameters(),
        trainer,
        desc="penet-i2p",
    )
    mae, mse, final_loss = _reconstruction_metrics(
        penet, images, targets, IMAGE
    )
    report = PhaseReportSchema(
        phase=2,
        epochs=trainer.epochs,
        mae=mae,
        mse=mse,
        loss_curve=loss_curve,
        final_loss=final_loss,
    )
    logger.info("Phase 2 estimation MAE %.4f MSE %.4f", mae, mse)
    return penet, report


def estimate_perspectives(
    penet: PENet, dataset: Sequence[Scene]
) -> List[np.ndarray]:
    return [penet.estimate_perspective(scene.image) for scene in dataset]


def joint_loss_and_backward(
    net: DensityNetwork,
    penet: PENet,
    image: np.ndarray,
    target: np.ndarray,
    roi: Optional[np.ndarray] = None,
    perspective: Optional[np.ndarray] = None,
    perspective_weight: float = 0.0,
    backward: bool = True,
) -> float:
    """
    Density loss of the network guided by the image encoder's row-collapsed
    estimate, plus the weighted reconstruction loss when a perspective map
    is supervised. With backward set, gradients reach the density network
    and the whole PENet path; the caller decides which ones are applied.
    """
    estimate = penet.forward(image, IMAGE)
    guide = row_mean_collapse(penet.scaler.unscale(estimate))
    pred = net.forward(image, guide)
    loss, grad = density_loss(pred, target, roi)

    supervised = perspective is not None and perspective_weight > 0
    if supervised:
        scaled = penet.scaler.scale(np.asarray(perspective, estimate.dtype))
        perspective_loss, perspective_grad = density_loss(estimate, scaled)
        loss += perspective_weight * perspective_loss
    if not backward:
        return loss

    _, grad_guide = net.backward(grad)
    # adjoint of the row mean spreads each row's mean gradient back
    grad_estimate = np.repeat(
        grad_guide.mean(axis=1, keepdims=True), grad_guide.shape[1], axis=1
    ) * penet.scaler.span
    if supervised:
        grad_estimate = grad_estimate + perspective_weight * perspective_grad
    penet.backward(grad_estimate.astype(estimate.dtype), IMAGE)
    return loss


def _phase3_report(
    net: DensityNetwork,
    dataset: Sequence[Scene],
    guidance: Sequence[np.ndarray],
    config: Phase3ConfigSchema,
    loss_curve: List[float],
) -> PhaseReportSchema:
    counts = [
        predict_count(net, scene, guide)
        for scene, guide in zip(dataset, guidance)
    ]
    mae, mse = mae_mse([c[0] for c in counts], [c[1] for c in counts])
    return PhaseReportSchema(
        phase=3,
        epochs=config.trainer.epochs,
        mae=mae,
        mse=mse,
        loss_curve=loss_curve,
        mode=config.mode,
        final_loss=mean_density_loss(net, dataset, guidance),
    )


def finetune_phase3(
    net: DensityNetwork,
    penet: PENet,
    dataset: Sequence[Scene],
    config: Phase3ConfigSchema,
) -> Tuple[DensityNetwork, PENet, PhaseReportSchema]:
    """
    Train the density network on perspective estimated from the images.

    OURS_A freezes the whole PENet and guides with its row-mean collapsed
    estimates. OURS_B trains the image encoder jointly with the density
    network through the density loss (plus the weighted reconstruction
    loss when supervise_perspective is set); the decoder stays frozen.

    Returns:
        Tuple[DensityNetwork, PENet, PhaseReportSchema]: Both networks and
        the count metrics on the training scenes.

    Raises:
        EmptyDatasetError: If the dataset is empty.
        MissingDecoderError: For OURS_B without a pre-trained decoder.
    """
    if len(dataset) == 0:
        raise EmptyDatasetError()
    mode = Phase3ModeEnum(config.mode)

    if mode == Phase3ModeEnum.OURS_A:
        guidance = estimate_perspectives(penet, dataset)
        net, loss_curve = train(
            net, dataset, config.trainer, perspectives=guidance
        )
        report = _phase3_report(net, dataset, guidance, config, loss_curve)
        logger.info("Phase 3 (%s) count MAE %.4f", mode.value, report.mae)
        return net, penet, report

    if not penet.decoder_trained:
        raise MissingDecoderError()
    weight = (
        config.perspective_loss_weight if config.supervise_perspective else 0.0
    )
    samples = [
        (
            scene.image,
            feature_target(scene, net.stride),
            feature_roi(scene, net.stride),
            scene.gt_perspective,
        )
        for scene in dataset
    ]

    def step(sample, flip: bool) -> float:
        image, target, roi, perspective = (
            flip_horizontal(item, flip) for item in sample
        )
        penet.zero_grad()
        return joint_loss_and_backward(
            net, penet, image, target, roi, perspective, weight
        )

    loss_curve = run_epochs(
        samples,
        step,
        net.parameters() + penet.encoder_i.parameters(),
        config.trainer,
        desc="joint",
    )
    guidance = estimate_perspectives(penet, dataset)
    report = _phase3_report(net, dataset, guidance, config, loss_curve)
    logger.info("Phase 3 (%s) count MAE %.4f", mode.value, report.mae)
    return net, penet, report


def joint_gradcheck(
    net: DensityNetwork,
    penet: PENet,
    scene: Scene,
    h: float = 1e-4,
    tolerance: float = 1e-4,
    max_checks: Optional[int] = None,
    seed: int = 0,
) -> GradReportSchema:
    """
    Gradient check of the joint path through the image encoder, the row
    collapse and the density network, on float64 copies of both networks.
    The decoder and the perspective encoder are not probed.
    """
    net64 = net.astype(np.float64)
    penet64 = penet.astype(np.float64)
    image = scene.image.astype(np.float64)
    target = feature_target(scene, net.stride).astype(np.float64)
    roi = feature_roi(scene, net.stride)

    def loss() -> float:
        return joint_loss_and_backward(
            net64, penet64, image, target, roi, backward=False
        )

    def loss_and_backward() -> float:
        net64.zero_grad()
        penet64.zero_grad()
        return joint_loss_and_backward(net64, penet64, image, target, roi)

    probe = GradientProbe(
        named_parameters=(
            net64.named_parameters()
            + penet64.encoder_i.named_parameters("penet.encoder_i")
        ),
        loss=loss,
        loss_and_backward=loss_and_backward,
        pattern=lambda: (
            net64.activation_pattern() + penet64.activation_pattern(IMAGE)
        ),
        near_kink=lambda: near_kink_parameters(net64),
    )
    return check_gradients(probe, h, tolerance, max_checks, seed)
