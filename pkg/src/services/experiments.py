import logging
import statistics
from typing import Dict, List, Optional, Sequence, Tuple

from density import Scene, synth_dataset
from filters import bench_inputs, filter_approx, time_calls
from kernels import build_dictionary
from networks import (
    PENet,
    build_toy_net,
    estimate_perspectives,
    finetune_phase3,
    mean_density_loss,
    train,
    train_phase1,
    train_phase2,
)
from schemas import (
    ExperimentReportSchema,
    Phase3ModeEnum,
    RunConfigSchema,
    TrainerConfigSchema,
)
from services.evaluation import evaluate

logger = logging.getLogger(__name__)

TRAIN_SHARE = 0.8
BENEFIT_MARGIN = 0.9
DEFAULT_BLOCK_COUNTS = (1, 3, 5)
DEFAULT_KERNEL_SIZES = (3, 5, 7, 9)
SWEEP_SHAPE = (8, 32, 32)


def split_dataset(
    config: RunConfigSchema, seed: int, threads: Optional[int] = None
) -> Tuple[List[Scene], List[Scene]]:
    """Seeded synthetic scenes split into train and test parts."""
    scenes = synth_dataset(config.num_scenes, config.scenes, seed, threads)
    cut = min(max(int(round(TRAIN_SHARE * len(scenes))), 1), len(scenes) - 1)
    if cut < 1:
        return scenes, scenes
    return scenes[:cut], scenes[cut:]


def _seeded(trainer: TrainerConfigSchema, seed: int) -> TrainerConfigSchema:
    return trainer.model_copy(update={"seed": seed})


def _medians(metrics: Dict[str, List[float]]) -> Dict[str, float]:
    return {
        name: statistics.median(values)
        for name, values in metrics.items() if values
    }


def _train_and_test(
    config: RunConfigSchema,
    network_updates: dict,
    train_set: Sequence[Scene],
    test_set: Sequence[Scene],
    seed: int,
    threads: Optional[int],
) -> float:
    network = config.network.model_copy(update=network_updates)
    net = build_toy_net(
        network,
        seed=seed,
        perspective_maps=[scene.gt_perspective for scene in train_set],
    )
    net, _ = train(net, train_set, _seeded(config.trainer, seed))
    return evaluate(net, test_set, threads).mae


def pgc_benefit(
    config: RunConfigSchema, threads: Optional[int] = None
) -> ExperimentReportSchema:
    """
    Test MAE of the PGC network against the same architecture with
    smoothing disabled (a = 0), per seed.
    """
    metrics = {"pgc_mae": [], "baseline_mae": []}
    for seed in config.seeds:
        train_set, test_set = split_dataset(config, seed, threads)
        metrics["pgc_mae"].append(
            _train_and_test(
                config, {"smoothing": True}, train_set, test_set, seed,
                threads,
            )
        )
        metrics["baseline_mae"].append(
            _train_and_test(
                config, {"smoothing": False}, train_set, test_set, seed,
                threads,
            )
        )
        logger.info(
            "Seed %d: PGC MAE %.4f, baseline MAE %.4f",
            seed, metrics["pgc_mae"][-1], metrics["baseline_mae"][-1],
        )
    medians = _medians(metrics)
    return ExperimentReportSchema(
        name="benefit",
        seeds=list(config.seeds),
        metrics=metrics,
        medians=medians,
        passed=medians["pgc_mae"] <= BENEFIT_MARGIN * medians["baseline_mae"],
    )


def block_sweep(
    config: RunConfigSchema,
    block_counts: Sequence[int] = DEFAULT_BLOCK_COUNTS,
    threads: Optional[int] = None,
) -> ExperimentReportSchema:
    """Test MAE per number of stacked PGC blocks."""
    metrics = {f"mae_blocks_{n}": [] for n in block_counts}
    for seed in config.seeds:
        train_set, test_set = split_dataset(config, seed, threads)
        for n in block_counts:
            metrics[f"mae_blocks_{n}"].append(
                _train_and_test(
                    config, {"num_pgc_blocks": n}, train_set, test_set, seed,
                    threads,
                )
            )
    medians = _medians(metrics)
    passed = None
    if "mae_blocks_1" in medians and "mae_blocks_3" in medians:
        passed = medians["mae_blocks_3"] <= medians["mae_blocks_1"]
    return ExperimentReportSchema(
        name="blocks",
        seeds=list(config.seeds),
        metrics=metrics,
        medians=medians,
        passed=passed,
    )


def kernel_size_sweep(
    config: RunConfigSchema,
    kernel_sizes: Sequence[int] = DEFAULT_KERNEL_SIZES,
    reps: int = 3,
    threads: Optional[int] = None,
) -> ExperimentReportSchema:
    """
    Grid size, retained count, preserved energy and fast-path timing of the
    dictionary for each kernel size. Lists are aligned with kernel_size.
    """
    metrics = {
        "kernel_size": [],
        "grid_size": [],
        "retained_count": [],
        "energy_ratio": [],
        "approx_median_ms": [],
    }
    seed = config.seeds[0]
    for size in kernel_sizes:
        dictionary = build_dictionary(
            config.dictionary.model_copy(update={"kernel_size": size})
        )
        x, sigma = bench_inputs(SWEEP_SHAPE, dictionary, seed)
        stats, _ = time_calls(
            lambda: filter_approx(x, sigma, dictionary, threads=threads),
            reps,
        )
        metrics["kernel_size"].append(float(size))
        metrics["grid_size"].append(float(dictionary.grid_size))
        metrics["retained_count"].append(float(dictionary.retained_count))
        metrics["energy_ratio"].append(dictionary.energy_ratio)
        metrics["approx_median_ms"].append(stats.median_ms)
    return ExperimentReportSchema(
        name="ksweep",
        seeds=[seed],
        metrics=metrics,
        medians={},
        notes=f"fast path timed on {SWEEP_SHAPE} features",
    )


def _pretrained_penet(
    config: RunConfigSchema, train_set: Sequence[Scene], seed: int
) -> PENet:
    trainer = _seeded(config.penet_trainer, seed)
    penet, _ = train_phase1(
        [scene.gt_perspective for scene in train_set], config.penet, trainer
    )
    penet, _ = train_phase2(
        [(scene.image, scene.gt_perspective) for scene in train_set],
        penet,
        trainer,
    )
    return penet


def guidance_comparison(
    config: RunConfigSchema, threads: Optional[int] = None
) -> ExperimentReportSchema:
    """
    Test MAE of networks guided by ground-truth perspective against
    networks guided by the frozen PENet's estimates.
    """
    metrics = {"gt_mae": [], "estimated_mae": []}
    for seed in config.seeds:
        train_set, test_set = split_dataset(config, seed, threads)
        metrics["gt_mae"].append(
            _train_and_test(config, {}, train_set, test_set, seed, threads)
        )

        penet = _pretrained_penet(config, train_set, seed)
        estimated = estimate_perspectives(penet, train_set)
        net = build_toy_net(
            config.network, seed=seed, perspective_maps=estimated
        )
        phase3 = config.phase3.model_copy(
            update={
                "mode": Phase3ModeEnum.OURS_A,
                "trainer": _seeded(config.trainer, seed),
            }
        )
        net, penet, _ = finetune_phase3(net, penet, train_set, phase3)
        metrics["estimated_mae"].append(
            evaluate(
                net, test_set, threads,
                perspectives=estimate_perspectives(penet, test_set),
            ).mae
        )
    return ExperimentReportSchema(
        name="guidance",
        seeds=list(config.seeds),
        metrics=metrics,
        medians=_medians(metrics),
    )


def penet_mode_comparison(
    config: RunConfigSchema, threads: Optional[int] = None
) -> ExperimentReportSchema:
    """
    Frozen-estimator (OURS_A) against jointly trained estimator (OURS_B)
    fine-tuning from the same pre-trained PENet and network seed. Compares
    the mean density loss on the test scenes under each mode's guidance.
    """
    metrics = {
        f"{key}_{metric}": []
        for key in ("ours_a", "ours_b")
        for metric in ("loss", "mae")
    }
    for seed in config.seeds:
        train_set, test_set = split_dataset(config, seed, threads)
        penet = _pretrained_penet(config, train_set, seed)
        maps = estimate_perspectives(penet, train_set)

        for mode, key in (
            (Phase3ModeEnum.OURS_A, "ours_a"),
            (Phase3ModeEnum.OURS_B, "ours_b"),
        ):
            phase3 = config.phase3.model_copy(
                update={"mode": mode, "trainer": _seeded(config.trainer, seed)}
            )
            net = build_toy_net(
                config.network, seed=seed, perspective_maps=maps
            )
            net, tuned, _ = finetune_phase3(
                net, penet.copy(), train_set, phase3
            )
            guidance = estimate_perspectives(tuned, test_set)
            metrics[f"{key}_loss"].append(
                mean_density_loss(net, test_set, guidance)
            )
            metrics[f"{key}_mae"].append(
                evaluate(net, test_set, threads, perspectives=guidance).mae
            )
    medians = _medians(metrics)
    return ExperimentReportSchema(
        name="penet",
        seeds=list(config.seeds),
        metrics=metrics,
        medians=medians,
        passed=medians["ours_b_loss"] <= medians["ours_a_loss"],
    )


EXPERIMENTS = {
    "benefit": pgc_benefit,
    "blocks": block_sweep,
    "ksweep": kernel_size_sweep,
    "guidance": guidance_comparison,
    "penet": penet_mode_comparison,
}


def run_experiment(
    name: str, config: RunConfigSchema, threads: Optional[int] = None
) -> ExperimentReportSchema:
    return EXPERIMENTS[name](config, threads=threads)
