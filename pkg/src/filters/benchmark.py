import logging
import statistics
import time
from typing import Callable, List, Optional, Tuple

import numpy as np

from config import get_settings
from exceptions import InvalidArgumentError
from filters.approx import filter_approx
from filters.exact import filter_exact
from kernels import KernelDictionary
from schemas import BenchReportSchema, PaddingModeEnum, TimingStatsSchema
from utils import tensor_checksum

logger = logging.getLogger(__name__)


def bench_inputs(
    shape: Tuple[int, int, int], dictionary: KernelDictionary, seed: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Seeded float32 features and a row-constant blur map whose rows sweep
    the dictionary range from top to bottom.
    """
    channels, height, width = shape
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((channels, height, width)).astype(np.float32)
    rows = np.linspace(dictionary.sigma_min, dictionary.sigma_max, height)
    sigma = np.repeat(rows[:, None], width, axis=1).astype(np.float32)
    return x, sigma


def time_calls(
    func: Callable[[], np.ndarray], reps: int
) -> Tuple[TimingStatsSchema, np.ndarray]:
    """Wall-clock statistics of reps calls and the last result."""
    timings: List[float] = []
    result = None
    for _ in range(reps):
        start = time.perf_counter()
        result = func()
        timings.append((time.perf_counter() - start) * 1000.0)
    stats = TimingStatsSchema(
        median_ms=statistics.median(timings),
        min_ms=min(timings),
        max_ms=max(timings),
        timings_ms=timings,
    )
    return stats, result


def relative_l2(estimate: np.ndarray, reference: np.ndarray) -> float:
    reference = reference.astype(np.float64)
    difference = estimate.astype(np.float64) - reference
    norm = np.linalg.norm(reference)
    if norm == 0:
        return float(np.linalg.norm(difference))
    return float(np.linalg.norm(difference) / norm)


def bench_filter(
    shape: Tuple[int, int, int],
    dictionary: KernelDictionary,
    reps: int = 5,
    seed: int = 0,
    padding: PaddingModeEnum = PaddingModeEnum.REPLICATE,
    threads: Optional[int] = None,
    min_speedup: Optional[float] = None,
) -> BenchReportSchema:
    """
    Time the brute-force and the low-rank filter on identical inputs.

    Args:
        shape (Tuple[int, int, int]): (C_f, H, W) of the random features.
        dictionary (KernelDictionary): Basis for the fast path; its kernel
            size and normalization also drive the exact path.
        reps (int): Calls per path, at least 3.
        seed (int): Input seed.
        padding (PaddingModeEnum): Boundary handling of both paths.
        threads (int, optional): Channel workers of the fast path.
        min_speedup (float, optional): Speedup the run must reach to pass,
            BENCH_MIN_SPEEDUP by default.

    Returns:
        BenchReportSchema: Median/min/max milliseconds per path, the
        speedup of medians with its pass flag, the input checksum and the
        relative L2 gap.

    Raises:
        InvalidArgumentError: If reps < 3 or the shape has an empty axis.
    """
    if reps < 3:
        raise InvalidArgumentError(f"reps must be at least 3, got {reps}.")
    if len(shape) != 3 or min(shape) < 1:
        raise InvalidArgumentError(
            f"Shape must be three positive dims, got {tuple(shape)}."
        )
    x, sigma = bench_inputs(shape, dictionary, seed)
    config = dictionary.config

    exact_stats, exact = time_calls(
        lambda: filter_exact(
            x, sigma, config.kernel_size, config.normalization_mode, padding
        ),
        reps,
    )
    approx_stats, approx = time_calls(
        lambda: filter_approx(x, sigma, dictionary, padding, threads), reps
    )
    speedup = exact_stats.median_ms / max(approx_stats.median_ms, 1e-9)
    if min_speedup is None:
        min_speedup = get_settings().BENCH_MIN_SPEEDUP
    logger.info(
        "Bench %s: exact %.2f ms, approx %.2f ms, speedup %.2fx",
        tuple(shape), exact_stats.median_ms, approx_stats.median_ms, speedup,
    )
    if speedup < min_speedup:
        logger.warning(
            "Speedup %.2fx is below the required %.2fx", speedup, min_speedup
        )
    return BenchReportSchema(
        shape=list(shape),
        reps=reps,
        seed=seed,
        dictionary=dictionary.metadata(),
        exact=exact_stats,
        approx=approx_stats,
        speedup=speedup,
        min_speedup=min_speedup,
        passed=speedup >= min_speedup,
        input_checksum=tensor_checksum(x, sigma),
        relative_error=relative_l2(approx, exact),
    )
