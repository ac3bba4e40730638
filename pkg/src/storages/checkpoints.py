import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from exceptions import ContainerFormatError
from kernels import KernelDictionary
from networks import (
    DensityNetwork,
    PENet,
    PerspectiveScaler,
    build_penet,
    build_toy_net,
)
from schemas import (
    CheckpointManifestSchema,
    NetworkConfigSchema,
    PENetConfigSchema,
)
from storages.interfaces import TensorStorageInterface

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
LOSS_CURVE = "loss_curve.csv"
NETWORK_KIND = "density_network"
PENET_KIND = "penet"


def _parameter_file(name: str) -> str:
    return f"params/{name}.ftns"


def _write_parameters(
    storage: TensorStorageInterface, state: Dict[str, np.ndarray]
) -> Dict[str, List[int]]:
    shapes = {}
    for name, value in state.items():
        # scalars are stored as rank-1 containers
        storage.write_tensor(_parameter_file(name), np.atleast_1d(value))
        shapes[name] = list(value.shape)
    return shapes


def _read_parameters(
    storage: TensorStorageInterface, manifest: CheckpointManifestSchema
) -> Dict[str, np.ndarray]:
    state = {}
    for name in manifest.parameters:
        value = storage.read_tensor(_parameter_file(name))
        shape = tuple(manifest.shapes[name])
        if value.size != int(np.prod(shape, dtype=np.int64)):
            raise ContainerFormatError(
                f"Parameter {name} holds {value.size} values, manifest "
                f"shape {shape} requires {int(np.prod(shape))}."
            )
        state[name] = value.reshape(shape)
    return state


def write_loss_curve(
    storage: TensorStorageInterface, loss_curve: Sequence[float]
) -> str:
    rows = [(epoch + 1, loss) for epoch, loss in enumerate(loss_curve)]
    return storage.write_csv(LOSS_CURVE, ("epoch", "loss"), rows)


def read_loss_curve(storage: TensorStorageInterface) -> List[float]:
    return [float(row[1]) for row in storage.read_csv(LOSS_CURVE)]


def _save(
    storage: TensorStorageInterface,
    kind: str,
    config: dict,
    state: Dict[str, np.ndarray],
    seed: int,
    epoch: int,
    loss_curve: Optional[Sequence[float]],
) -> CheckpointManifestSchema:
    shapes = _write_parameters(storage, state)
    manifest = CheckpointManifestSchema(
        kind=kind,
        config=config,
        seed=seed,
        epoch=epoch,
        loss=float(loss_curve[-1]) if loss_curve else None,
        parameters=list(state),
        shapes=shapes,
    )
    storage.write_json(MANIFEST, manifest.model_dump(mode="json"))
    if loss_curve is not None:
        write_loss_curve(storage, loss_curve)
    logger.info("Saved %s checkpoint at epoch %d", kind, epoch)
    return manifest


def _manifest(
    storage: TensorStorageInterface, kind: str
) -> CheckpointManifestSchema:
    manifest = CheckpointManifestSchema.model_validate(
        storage.read_json(MANIFEST)
    )
    if manifest.kind != kind:
        raise ContainerFormatError(
            f"Expected a {kind} checkpoint, found {manifest.kind}."
        )
    return manifest


def save_network(
    storage: TensorStorageInterface,
    net: DensityNetwork,
    epoch: int = 0,
    loss_curve: Optional[Sequence[float]] = None,
) -> CheckpointManifestSchema:
    """
    Write a density network checkpoint: one container per parameter under
    params/, the manifest and, when given, the loss curve as CSV.

    Args:
        storage (TensorStorageInterface): Checkpoint directory.
        net (DensityNetwork): Network to save.
        epoch (int): Number of epochs trained.
        loss_curve (Sequence[float], optional): Per-epoch losses.

    Returns:
        CheckpointManifestSchema: The written manifest.
    """
    return _save(
        storage,
        NETWORK_KIND,
        {"network": net.config.model_dump(mode="json")},
        net.state_dict(),
        net.seed,
        epoch,
        loss_curve,
    )


def load_network(
    storage: TensorStorageInterface,
    dictionary: Optional[KernelDictionary] = None,
) -> Tuple[DensityNetwork, CheckpointManifestSchema]:
    """
    Rebuild the architecture from the manifest and load the stored values.

    Raises:
        TensorFileNotFoundError: If the manifest or a parameter is missing.
        ContainerFormatError: On a wrong checkpoint kind or parameter size.
    """
    manifest = _manifest(storage, NETWORK_KIND)
    config = NetworkConfigSchema.model_validate(manifest.config["network"])
    net = build_toy_net(config, seed=manifest.seed, dictionary=dictionary)
    net.load_state_dict(_read_parameters(storage, manifest))
    return net, manifest


def save_penet(
    storage: TensorStorageInterface,
    penet: PENet,
    epoch: int = 0,
    loss_curve: Optional[Sequence[float]] = None,
) -> CheckpointManifestSchema:
    config = {
        "penet": penet.config.model_dump(mode="json"),
        "scaler": penet.scaler.as_dict(),
        "decoder_trained": penet.decoder_trained,
    }
    return _save(
        storage,
        PENET_KIND,
        config,
        penet.state_dict(),
        penet.seed,
        epoch,
        loss_curve,
    )


def load_penet(
    storage: TensorStorageInterface,
) -> Tuple[PENet, CheckpointManifestSchema]:
    manifest = _manifest(storage, PENET_KIND)
    config = PENetConfigSchema.model_validate(manifest.config["penet"])
    penet = build_penet(config, seed=manifest.seed)
    penet.load_state_dict(_read_parameters(storage, manifest))
    penet.scaler = PerspectiveScaler(**manifest.config["scaler"])
    penet.decoder_trained = bool(manifest.config["decoder_trained"])
    return penet, manifest
