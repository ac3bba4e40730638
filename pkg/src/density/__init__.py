from density.maps import (
    GT_SIGMA,
    as_dots,
    make_density,
    count,
    block_sum_downsample,
    mae_mse,
)
from density.scenes import (
    HEAD_GAP,
    Scene,
    synth_scene,
    synth_scene_from_config,
    synth_dataset,
    derive_seeds,
    apply_roi,
)
