import io
import logging
from typing import List, Sequence

import numpy as np
from PIL import Image

from density import Scene, as_dots
from exceptions import BaseStorageError, ShapeMismatchError
from schemas import SceneMetadataSchema
from storages.interfaces import TensorStorageInterface

logger = logging.getLogger(__name__)

SCENE_FILES = {
    "image": "image.ftns",
    "preview": "image.pgm",
    "dots": "dots.csv",
    "density": "density.ftns",
    "perspective": "perspective.ftns",
    "roi": "roi.ftns",
    "metadata": "metadata.json",
}


def encode_pgm(image: np.ndarray) -> bytes:
    """
    Binary PGM (P5) of a (C, H, W) or (H, W) image in [0, 1]; channels are
    averaged and values quantized to 8 bits.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 3:
        image = image.mean(axis=0)
    if image.ndim != 2:
        raise ShapeMismatchError(
            f"PGM export needs a 2-D or 3-D image, got shape {image.shape}."
        )
    pixels = np.round(np.clip(image, 0.0, 1.0) * 255).astype(np.uint8)
    buffer = io.BytesIO()
    Image.fromarray(pixels).save(buffer, format="PPM")
    return buffer.getvalue()


def decode_pgm(data: bytes) -> np.ndarray:
    """Gray levels of a PGM file scaled back to [0, 1] as float32."""
    try:
        with Image.open(io.BytesIO(data)) as image:
            pixels = np.asarray(image.convert("L"), dtype=np.float32)
    except (OSError, ValueError) as e:
        raise BaseStorageError(f"Unreadable PGM image: {e}") from e
    return pixels / 255.0


def write_perspective_csv(
    storage: TensorStorageInterface, name: str, perspective: np.ndarray
) -> str:
    """One line per image row, values separated by commas, no header."""
    perspective = np.asarray(perspective)
    if perspective.ndim != 2:
        raise ShapeMismatchError(
            f"Perspective map must be 2-D, got shape {perspective.shape}."
        )
    rows = [[repr(float(v)) for v in row] for row in perspective]
    return storage.write_csv(name, (), rows)


def read_perspective_csv(
    storage: TensorStorageInterface, name: str
) -> np.ndarray:
    rows = storage.read_csv(name, has_header=False)
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise ShapeMismatchError(
            f"Perspective CSV {name} has rows of differing widths {widths}."
        )
    try:
        return np.array(rows, dtype=np.float64).astype(np.float32)
    except ValueError as e:
        raise BaseStorageError(
            f"Perspective CSV {name} holds non-numeric values: {e}"
        ) from e


def read_perspective(
    storage: TensorStorageInterface, name: str
) -> np.ndarray:
    """Perspective map from a tensor container or, for .csv names, CSV."""
    if name.lower().endswith(".csv"):
        return read_perspective_csv(storage, name)
    perspective = storage.read_tensor(name)
    if perspective.ndim != 2:
        raise ShapeMismatchError(
            f"Perspective tensor {name} must be 2-D, got {perspective.shape}."
        )
    return perspective


def save_scene(storage: TensorStorageInterface, scene: Scene) -> None:
    """
    Persist a scene as a directory: image container plus PGM preview, dots
    as x,y CSV, density, perspective and optional ROI containers and the
    metadata record.
    """
    storage.write_tensor(SCENE_FILES["image"], scene.image)
    storage.write_bytes(SCENE_FILES["preview"], encode_pgm(scene.image))
    storage.write_csv(
        SCENE_FILES["dots"],
        ("x", "y"),
        [(repr(float(x)), repr(float(y))) for x, y in scene.dots],
    )
    storage.write_tensor(SCENE_FILES["density"], scene.gt_density)
    storage.write_tensor(SCENE_FILES["perspective"], scene.gt_perspective)
    if scene.roi is not None:
        storage.write_tensor(SCENE_FILES["roi"], scene.roi.astype(np.float32))
    storage.write_json(
        SCENE_FILES["metadata"], scene.metadata.model_dump(mode="json")
    )


def load_scene(storage: TensorStorageInterface) -> Scene:
    image = storage.read_tensor(SCENE_FILES["image"])
    if image.ndim != 3:
        raise ShapeMismatchError(
            f"Scene image must be (C, H, W), got shape {image.shape}."
        )
    dots = storage.read_csv(SCENE_FILES["dots"])
    roi = None
    if storage.exists(SCENE_FILES["roi"]):
        roi = storage.read_tensor(SCENE_FILES["roi"]) > 0.5
    return Scene(
        image=image,
        dots=as_dots([(float(x), float(y)) for x, y in dots]),
        gt_density=storage.read_tensor(SCENE_FILES["density"]),
        gt_perspective=storage.read_tensor(SCENE_FILES["perspective"]),
        metadata=SceneMetadataSchema.model_validate(
            storage.read_json(SCENE_FILES["metadata"])
        ),
        roi=roi,
    )


def scene_dir_name(index: int) -> str:
    return f"scene_{index:04d}"


def save_dataset(
    storage: TensorStorageInterface, scenes: Sequence[Scene]
) -> List[str]:
    names = []
    for index, scene in enumerate(scenes):
        name = scene_dir_name(index)
        save_scene(storage.child(name), scene)
        names.append(name)
    logger.info("Saved %d scenes", len(names))
    return names


def load_dataset(storage: TensorStorageInterface) -> List[Scene]:
    """Scenes stored by save_dataset, in index order."""
    scenes = []
    index = 0
    while storage.exists(scene_dir_name(index)):
        scenes.append(load_scene(storage.child(scene_dir_name(index))))
        index += 1
    return scenes
