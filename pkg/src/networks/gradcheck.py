import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Set, Tuple

import numpy as np

from density import Scene
from networks.interfaces import Parameter
from networks.model import DensityNetwork
from networks.pgc import PERSPECTIVE_FIELDS
from networks.training import density_loss, feature_roi, feature_target
from schemas import GradReportSchema

logger = logging.getLogger(__name__)

KINK_MARGIN = 1e-3
ABS_FLOOR = 1e-6


@dataclass
class GradientProbe:
    """
    What the checker needs from a differentiable system.

    Attributes:
        named_parameters: Parameters to probe, perturbed in place.
        loss: Forward pass only, returns the scalar loss.
        loss_and_backward: Forward and backward with zeroed gradients,
            returns the loss and leaves analytic gradients in the parameters.
        pattern: Piecewise-linear region masks of the last forward pass.
        near_kink: Names of parameters to exclude after the base pass.
    """

    named_parameters: List[Tuple[str, Parameter]]
    loss: Callable[[], float]
    loss_and_backward: Callable[[], float]
    pattern: Callable[[], List[np.ndarray]]
    near_kink: Callable[[], Set[str]] = field(default=lambda: set())


def _same_pattern(left: List[np.ndarray], right: List[np.ndarray]) -> bool:
    return len(left) == len(right) and all(
        np.array_equal(a, b) for a, b in zip(left, right)
    )


def check_gradients(
    probe: GradientProbe,
    h: float = 1e-4,
    tolerance: float = 1e-4,
    max_checks: Optional[int] = None,
    seed: int = 0,
) -> GradReportSchema:
    """
    Compare analytic gradients with central differences (L(w+h) - L(w-h)) / 2h.

    The relative error of a scalar is |a - n| / max(|a|, |n|, ABS_FLOOR).
    A scalar is excluded, and counted, when its parameter sits within
    KINK_MARGIN of a hinge or clamp, or when either perturbation moves any
    rectifier, hinge or clamp region.

    Args:
        probe (GradientProbe): System under test.
        h (float): Perturbation.
        tolerance (float): Largest accepted relative error.
        max_checks (int, optional): Probe a seeded random subset of scalars.
        seed (int): Subset seed.

    Returns:
        GradReportSchema: Max/mean relative error, per-parameter maxima and
        the pass flag.
    """
    trainable = [(n, p) for n, p in probe.named_parameters if p.trainable]
    probe.loss_and_backward()
    analytic = {
        name: p.grad.astype(np.float64).copy() for name, p in trainable
    }
    base_pattern = probe.pattern()
    skipped = probe.near_kink()

    entries = [(n, p, i) for n, p in trainable for i in range(p.size)]
    if max_checks is not None and len(entries) > max_checks:
        rng = np.random.default_rng(seed)
        chosen = np.sort(rng.choice(len(entries), max_checks, replace=False))
        entries = [entries[i] for i in chosen]

    errors: List[float] = []
    per_parameter: Dict[str, float] = {}
    worst: Optional[str] = None
    excluded = 0
    for name, parameter, index in entries:
        if name in skipped:
            excluded += 1
            continue
        original = parameter.value.flat[index]
        parameter.value.flat[index] = original + h
        loss_plus = probe.loss()
        pattern_plus = probe.pattern()
        parameter.value.flat[index] = original - h
        loss_minus = probe.loss()
        pattern_minus = probe.pattern()
        parameter.value.flat[index] = original

        if not (
            _same_pattern(base_pattern, pattern_plus)
            and _same_pattern(base_pattern, pattern_minus)
        ):
            excluded += 1
            continue

        numeric = (loss_plus - loss_minus) / (2 * h)
        exact = float(analytic[name].flat[index])
        error = abs(exact - numeric) / max(abs(exact), abs(numeric), ABS_FLOOR)
        errors.append(error)
        if error > per_parameter.get(name, -1.0):
            per_parameter[name] = error
        if worst is None or error > per_parameter[worst]:
            worst = name

    max_error = max(errors) if errors else 0.0
    report = GradReportSchema(
        checked=len(errors),
        excluded=excluded,
        max_relative_error=max_error,
        mean_relative_error=float(np.mean(errors)) if errors else 0.0,
        tolerance=tolerance,
        step=h,
        passed=max_error <= tolerance,
        worst_parameter=worst,
        per_parameter=per_parameter,
    )
    logger.info(
        "Gradcheck: %d checked, %d excluded, max relative error %.3g",
        report.checked, report.excluded, report.max_relative_error,
    )
    return report


def near_kink_parameters(
    net: DensityNetwork, margin: float = KINK_MARGIN
) -> Set[str]:
    """Perspective scalars of blocks whose blur map lies near a kink."""
    names = set()
    for index, block in enumerate(net.blocks):
        if block.kink_distance() < margin:
            names.update(f"blocks.{index}.{f}" for f in PERSPECTIVE_FIELDS)
    return names


def network_probe(
    net: DensityNetwork,
    image: np.ndarray,
    p: np.ndarray,
    target: np.ndarray,
    roi: Optional[np.ndarray] = None,
) -> GradientProbe:

    def loss() -> float:
        return density_loss(net.forward(image, p), target, roi)[0]

    def loss_and_backward() -> float:
        net.zero_grad()
        value, grad = density_loss(net.forward(image, p), target, roi)
        net.backward(grad)
        return value

    return GradientProbe(
        named_parameters=net.named_parameters(),
        loss=loss,
        loss_and_backward=loss_and_backward,
        pattern=net.activation_pattern,
        near_kink=lambda: near_kink_parameters(net),
    )


def gradcheck(
    net: DensityNetwork,
    scene: Scene,
    h: float = 1e-4,
    tolerance: float = 1e-4,
    max_checks: Optional[int] = None,
    seed: int = 0,
    perspective: Optional[np.ndarray] = None,
) -> GradReportSchema:
    """
    Full-network gradient check of the density loss in float64.

    The network is copied and cast to float64; the caller's network is left
    untouched.
    """
    net64 = net.astype(np.float64)
    guide = scene.gt_perspective if perspective is None else perspective
    probe = network_probe(
        net64,
        scene.image.astype(np.float64),
        np.asarray(guide, dtype=np.float64),
        feature_target(scene, net.stride).astype(np.float64),
        feature_roi(scene, net.stride),
    )
    return check_gradients(probe, h, tolerance, max_checks, seed)
