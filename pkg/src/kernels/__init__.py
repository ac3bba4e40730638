from kernels.gaussian import (
    DIRAC_EPS,
    Kernel,
    distinct_radii_count,
    gaussian_kernel,
    gaussian_kernel_derivative_stack,
    gaussian_kernel_stack,
    squared_radii,
    validate_kernel_size,
)
from kernels.dictionary import (
    KernelDictionary,
    build_dictionary,
    energy_preserved,
    rank_profile,
    reconstruct_kernel,
    sigma_grid,
)
