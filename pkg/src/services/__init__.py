from services.evaluation import count_report, evaluate
from services.experiments import (
    EXPERIMENTS,
    split_dataset,
    pgc_benefit,
    block_sweep,
    kernel_size_sweep,
    guidance_comparison,
    penet_mode_comparison,
    run_experiment,
)
