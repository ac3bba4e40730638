import argparse
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ValidationError

from config import get_settings, get_tensor_storage
from density import Scene, synth_dataset
from exceptions import InvalidArgumentError, TensorFileNotFoundError
from schemas import NormalizationModeEnum, PaddingModeEnum, RunConfigSchema
from storages import LocalTensorStorage, TensorStorageInterface
from storages.scenes import load_dataset

logger = logging.getLogger(__name__)

FieldPath = Tuple[str, ...]

# flag destination -> config fields it overrides
FLAG_FIELDS: Dict[str, List[FieldPath]] = {
    "k": [
        ("dictionary", "kernel_size"),
        ("network", "dictionary", "kernel_size"),
    ],
    "sigma_min": [
        ("dictionary", "sigma_min"),
        ("network", "dictionary", "sigma_min"),
    ],
    "sigma_max": [
        ("dictionary", "sigma_max"),
        ("network", "dictionary", "sigma_max"),
    ],
    "sigma_step": [
        ("dictionary", "sigma_step"),
        ("network", "dictionary", "sigma_step"),
    ],
    "normalization": [
        ("dictionary", "normalization_mode"),
        ("network", "dictionary", "normalization_mode"),
    ],
    "energy": [
        ("dictionary", "energy_threshold"),
        ("network", "dictionary", "energy_threshold"),
    ],
    "retained": [
        ("dictionary", "retained_count"),
        ("network", "dictionary", "retained_count"),
    ],
    "blocks": [("network", "num_pgc_blocks")],
    "padding": [("network", "smoothing_padding")],
    "epochs": [("trainer", "epochs")],
    "lr": [("trainer", "learning_rate")],
    "penet_epochs": [("penet_trainer", "epochs")],
    "num_scenes": [("num_scenes",)],
    "height": [("scenes", "height")],
    "width": [("scenes", "width")],
    "count": [("scenes", "count")],
    "seeds": [("seeds",)],
}


def flag_name(dest: str) -> str:
    return "--" + dest.replace("_", "-")


def add_dictionary_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k", type=int, help="Odd kernel size.")
    parser.add_argument("--sigma-min", type=float, help="Smallest sigma.")
    parser.add_argument("--sigma-max", type=float, help="Largest sigma.")
    parser.add_argument("--sigma-step", type=float, help="Sigma grid step.")
    parser.add_argument(
        "--normalization",
        choices=[mode.value for mode in NormalizationModeEnum],
        help="Gaussian normalization of the candidates.",
    )
    parser.add_argument(
        "--energy", type=float, help="Energy threshold for the basis size."
    )
    parser.add_argument(
        "--retained", type=int, help="Fixed number of eigen-kernels."
    )


def add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="RunConfig JSON file.")
    parser.add_argument("--seed", type=int, help="Seed of the run.")
    parser.add_argument("--out", help="Output directory.")


def add_padding_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--padding",
        choices=[mode.value for mode in PaddingModeEnum],
        help="Boundary handling of the smoothing.",
    )


def _set_path(document: Dict[str, Any], path: FieldPath, value: Any) -> None:
    node = document
    for key in path[:-1]:
        child = node.get(key)
        if not isinstance(child, dict):
            child = {}
            node[key] = child
        node = child
    node[path[-1]] = value


def _describe(
    e: ValidationError, sources: Dict[FieldPath, str], origin: str
) -> str:
    """One line per error, naming the flag that set the field if any."""
    lines = []
    for error in e.errors():
        path = tuple(str(part) for part in error["loc"])
        source = sources.get(path, origin)
        where = ".".join(path) or "<root>"
        lines.append(f"{source}: {where}: {error['msg']}")
    return "\n".join(lines)


def read_config_document(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    file = Path(path)
    if not file.is_file():
        raise TensorFileNotFoundError(f"--config: file not found: {path}")
    try:
        document = json.loads(file.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InvalidArgumentError(f"--config: malformed JSON: {e}") from e
    if not isinstance(document, dict):
        raise InvalidArgumentError("--config: top level must be an object.")
    return document


def build_run_config(args: argparse.Namespace) -> RunConfigSchema:
    """
    RunConfig from the --config file with command-line flags applied on
    top, validated once.

    Raises:
        InvalidArgumentError: On schema violations; the message names the
        offending flag, or the --config file and field path.
        TensorFileNotFoundError: If the config file does not exist.
    """
    document = read_config_document(getattr(args, "config", None))
    sources: Dict[FieldPath, str] = {}
    for dest, paths in FLAG_FIELDS.items():
        value = getattr(args, dest, None)
        if value is None:
            continue
        for path in paths:
            _set_path(document, path, value)
            sources[path] = flag_name(dest)

    seed = getattr(args, "seed", None)
    if seed is not None:
        for path in (("trainer", "seed"), ("penet_trainer", "seed")):
            _set_path(document, path, seed)
            sources[path] = "--seed"
        if getattr(args, "seeds", None) is None:
            document["seeds"] = [seed]
            sources[("seeds",)] = "--seed"
    out = getattr(args, "out", None)
    if out is not None:
        _set_path(document, ("paths", "out_dir"), out)
        sources[("paths", "out_dir")] = "--out"

    try:
        config = RunConfigSchema.model_validate(document)
    except ValidationError as e:
        origin = args.config if getattr(args, "config", None) else "config"
        raise InvalidArgumentError(_describe(e, sources, origin)) from e
    logger.debug("Run config: %s", config.model_dump_json())
    return config


def run_seed(config: RunConfigSchema) -> int:
    return config.seeds[0] if config.seeds else get_settings().DEFAULT_SEED


def output_storage(config: RunConfigSchema) -> TensorStorageInterface:
    return get_tensor_storage(config.paths.out_dir)


def file_storage(path: str) -> Tuple[LocalTensorStorage, str]:
    """Storage of a file's directory and the file's name."""
    file = Path(path)
    return LocalTensorStorage(file.parent), file.name


def read_tensor_file(path: str) -> np.ndarray:
    storage, name = file_storage(path)
    return storage.read_tensor(name)


def load_or_synth_scenes(
    config: RunConfigSchema,
    scenes_dir: Optional[str] = None,
    threads: Optional[int] = None,
) -> List[Scene]:
    """Scenes stored under scenes_dir, else a seeded synthetic set."""
    scenes_dir = scenes_dir or config.paths.scenes_dir
    if scenes_dir is not None:
        scenes = load_dataset(LocalTensorStorage(scenes_dir))
        if not scenes:
            raise TensorFileNotFoundError(
                f"--scenes: no scene directories under {scenes_dir}"
            )
        return scenes
    return synth_dataset(
        config.num_scenes, config.scenes, run_seed(config), threads
    )


def emit_report(
    storage: TensorStorageInterface, name: str, report: BaseModel
) -> str:
    """Write a report as JSON and echo it on stdout."""
    document = report.model_dump(mode="json")
    path = storage.write_json(name, document)
    print(json.dumps(document, indent=2, sort_keys=True))
    logger.info("Wrote %s", path)
    return path


def parse_shape(values: Sequence[int], name: str) -> Tuple[int, ...]:
    if any(v < 1 for v in values):
        raise InvalidArgumentError(f"{name}: dimensions must be positive.")
    return tuple(values)

