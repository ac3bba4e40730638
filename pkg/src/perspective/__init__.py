from perspective.transforms import (
    PerspectiveParams,
    BlurTrace,
    normalize_perspective,
    blur_from_perspective,
    blur_trace,
    blur_backward,
    row_mean_collapse,
    is_row_constant,
    downsample_area,
    downsample_area_adjoint,
    init_perspective_params,
)
from perspective.synthesis import synth_perspective
