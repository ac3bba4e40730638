import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from density import Scene, mae_mse
from exceptions import EmptyDatasetError
from networks import DensityNetwork, predict_count
from schemas import EvalReportSchema
from utils import parallel_map, resolve_threads

logger = logging.getLogger(__name__)


def count_report(
    pred_counts: Sequence[float], gt_counts: Sequence[float]
) -> EvalReportSchema:
    """MAE and MSE (root of the mean squared error) of paired counts."""
    mae, mse = mae_mse(pred_counts, gt_counts)
    return EvalReportSchema(
        mae=mae,
        mse=mse,
        count=len(gt_counts),
        predicted_counts=[float(c) for c in pred_counts],
        gt_counts=[float(c) for c in gt_counts],
    )


def evaluate(
    net: DensityNetwork,
    scenes: Sequence[Scene],
    threads: Optional[int] = None,
    perspectives: Optional[Sequence[np.ndarray]] = None,
) -> EvalReportSchema:
    """
    Count every scene with the network and compare with ground truth.

    Scenes are split into contiguous chunks, one per worker, and every
    worker runs its own copy of the network, so results do not depend on
    the thread count.

    Args:
        net (DensityNetwork): Trained network; left untouched.
        scenes (Sequence[Scene]): Test scenes.
        threads (int, optional): Worker count, the PGC_THREADS setting
            when omitted.
        perspectives (Sequence[np.ndarray], optional): Guidance replacing
            the scenes' ground-truth perspective maps.

    Returns:
        EvalReportSchema: Counts and their MAE / MSE.

    Raises:
        EmptyDatasetError: If there are no scenes.
    """
    if len(scenes) == 0:
        raise EmptyDatasetError("Evaluation needs at least one scene.")
    guidance = perspectives
    if guidance is None:
        guidance = [scene.gt_perspective for scene in scenes]

    workers = min(resolve_threads(threads), len(scenes))
    bounds = np.linspace(0, len(scenes), workers + 1).astype(int)
    chunks = [
        list(zip(scenes[lo:hi], guidance[lo:hi]))
        for lo, hi in zip(bounds[:-1], bounds[1:])
    ]

    def run_chunk(
        chunk: List[Tuple[Scene, np.ndarray]]
    ) -> List[Tuple[float, float]]:
        local = net.copy()
        return [predict_count(local, scene, guide) for scene, guide in chunk]

    counts = [
        pair
        for chunk in parallel_map(run_chunk, chunks, workers)
        for pair in chunk
    ]
    report = count_report([c[0] for c in counts], [c[1] for c in counts])
    logger.info(
        "Evaluated %d scenes: MAE %.4f MSE %.4f",
        report.count, report.mae, report.mse,
    )
    return report
