from filters.convolution import (
    as_tensor,
    as_blur_map,
    pad_spatial,
    pad_spatial_adjoint,
    unfold,
    fold,
    conv_output_size,
    correlate_bank,
    correlate_bank_adjoint,
    correlate_same,
    correlate_same_adjoint,
)
from filters.approx import (
    CoefficientMaps,
    ApproxFilterCache,
    coefficient_maps,
    coefficient_derivative_maps,
    filter_approx,
    filter_approx_forward,
    filter_approx_backward,
)
from filters.exact import filter_exact
from filters.benchmark import (
    bench_filter,
    bench_inputs,
    relative_l2,
    time_calls,
)
