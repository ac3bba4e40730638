import logging

import numpy as np

from exceptions import ContainerFormatError
from kernels import KernelDictionary, gaussian_kernel_stack, sigma_grid
from schemas import DictionaryConfigSchema, DictionaryMetadataSchema
from storages.interfaces import TensorStorageInterface

logger = logging.getLogger(__name__)


def save_dictionary(
    storage: TensorStorageInterface,
    dictionary: KernelDictionary,
    name: str = "dictionary",
) -> str:
    """
    Write the eigen-kernels as a (C, K, K) container `<name>.ftns` and the
    construction record as the JSON sidecar `<name>.json`.

    Returns:
        str: Path of the written container.
    """
    storage.write_json(
        f"{name}.json", dictionary.metadata().model_dump(mode="json")
    )
    path = storage.write_tensor(f"{name}.ftns", dictionary.eigen_grids)
    logger.info(
        "Saved dictionary with C=%d to %s", dictionary.retained_count, path
    )
    return path


def config_from_metadata(
    metadata: DictionaryMetadataSchema,
) -> DictionaryConfigSchema:
    return DictionaryConfigSchema(
        kernel_size=metadata.kernel_size,
        sigma_min=metadata.sigma_min,
        sigma_max=metadata.sigma_max,
        sigma_step=metadata.sigma_step,
        normalization_mode=metadata.normalization_mode,
        energy_threshold=metadata.energy_threshold,
        retained_count=metadata.requested_count,
    )


def load_dictionary(
    storage: TensorStorageInterface, name: str = "dictionary"
) -> KernelDictionary:
    """
    Rebuild a dictionary from its container and sidecar. Candidates and
    the sigma grid are re-sampled from the recorded configuration; the
    eigen-kernels and singular values are taken as stored.

    Raises:
        TensorFileNotFoundError: If either file is missing.
        ContainerFormatError: If the container disagrees with the sidecar.
    """
    metadata = DictionaryMetadataSchema.model_validate(
        storage.read_json(f"{name}.json")
    )
    config = config_from_metadata(metadata)
    size = metadata.kernel_size
    grids = storage.read_tensor(f"{name}.ftns")
    if grids.shape != (metadata.retained_count, size, size):
        raise ContainerFormatError(
            f"Eigen-kernel container has shape {grids.shape}, metadata "
            f"expects ({metadata.retained_count}, {size}, {size})."
        )

    grid = sigma_grid(config)
    candidates = gaussian_kernel_stack(
        size, grid, config.normalization_mode
    ).reshape(grid.size, size * size)
    arrays = [
        grid,
        candidates.astype(np.float32),
        grids.reshape(metadata.retained_count, size * size),
        np.asarray(metadata.singular_values, dtype=np.float64),
    ]
    for array in arrays:
        array.setflags(write=False)
    return KernelDictionary(
        config=config,
        sigma_grid=arrays[0],
        candidates=arrays[1],
        eigen_kernels=arrays[2],
        singular_values=arrays[3],
        retained_count=metadata.retained_count,
        energy_ratio=metadata.energy_ratio,
    )
