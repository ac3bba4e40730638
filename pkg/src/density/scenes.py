import logging
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np
from pydantic import ValidationError

from density.maps import as_dots, make_density
from exceptions import InvalidArgumentError, ShapeMismatchError
from perspective import synth_perspective
from schemas import SceneConfigSchema, SceneMetadataSchema
from utils import parallel_map

logger = logging.getLogger(__name__)

HEAD_GAP = 2.0


@dataclass(frozen=True)
class Scene:
    """
    One synthetic training pair.

    Attributes:
        image (np.ndarray): (3, H, W) float32 image.
        dots (np.ndarray): (n, 2) head positions (x, y).
        gt_density (np.ndarray): (H, W) density map.
        gt_perspective (np.ndarray): (H, W) positive perspective map.
        metadata (SceneMetadataSchema): Generation record.
        roi (np.ndarray, optional): (H, W) boolean region of interest.
    """

    image: np.ndarray
    dots: np.ndarray
    gt_density: np.ndarray
    gt_perspective: np.ndarray
    metadata: SceneMetadataSchema
    roi: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        spatial = self.image.shape[1:]
        for name in ("gt_density", "gt_perspective", "roi"):
            value = getattr(self, name)
            if value is not None and value.shape != spatial:
                raise ShapeMismatchError(
                    f"Scene {name} shape {value.shape} does not match image "
                    f"shape {spatial}."
                )

    @property
    def height(self) -> int:
        return self.image.shape[1]

    @property
    def width(self) -> int:
        return self.image.shape[2]


def _scene_config(**values) -> SceneConfigSchema:
    try:
        return SceneConfigSchema(**values)
    except ValidationError as e:
        raise InvalidArgumentError(f"Invalid scene parameters: {e}") from e


def _render_disc(
    image: np.ndarray, x: float, y: float, radius: float, color: np.ndarray
) -> None:
    _, height, width = image.shape
    top = max(int(np.floor(y - radius)), 0)
    bottom = min(int(np.ceil(y + radius)) + 1, height)
    left = max(int(np.floor(x - radius)), 0)
    right = min(int(np.ceil(x + radius)) + 1, width)
    rows = np.arange(top, bottom)[:, None] + 0.5
    cols = np.arange(left, right)[None, :] + 0.5
    inside = (rows - y) ** 2 + (cols - x) ** 2 <= radius ** 2
    image[:, top:bottom, left:right][:, inside] = color[:, None]


def synth_scene(
    height: int,
    width: int,
    count: int,
    seed: int,
    head_scale: float = 1.0,
    perspective_base: float = 1.0,
    perspective_slope: Optional[float] = None,
    max_attempts: int = 200,
) -> Scene:
    """
    Render a scene of disc-shaped heads over a vertical perspective ramp.

    Heads land more often on far rows (row weight proportional to 1 / p)
    and have radius head_scale * p(row). Discs stay inside the image and
    keep a gap of HEAD_GAP pixels between each other; a head that cannot be
    placed within max_attempts draws is dropped and the shortfall shows up
    in metadata.placed_count.

    Args:
        height (int): Image height, at least 32.
        width (int): Image width, at least 32.
        count (int): Requested number of heads.
        seed (int): Generator seed.
        head_scale (float): Radius per unit of perspective.
        perspective_base (float): Perspective of the top row.
        perspective_slope (float, optional): Perspective increase per row;
            the default makes the bottom row five times the top row.
        max_attempts (int): Placement draws per head.

    Returns:
        Scene: Image, dots, density and perspective, bit-identical for a
        given seed.
    """
    config = _scene_config(
        height=height,
        width=width,
        count=count,
        perspective_base=perspective_base,
        perspective_slope=perspective_slope,
        head_scale=head_scale,
        max_attempts=max_attempts,
    )
    return synth_scene_from_config(config, seed)


def synth_scene_from_config(config: SceneConfigSchema, seed: int) -> Scene:
    height, width = config.height, config.width
    perspective = synth_perspective(
        height, width, config.perspective_base, config.slope, 0.0, seed
    )
    row_values = perspective[:, 0].astype(np.float64)
    row_weights = 1.0 / row_values
    row_weights /= row_weights.sum()

    rng = np.random.default_rng(seed)
    image = np.zeros((3, height, width), dtype=np.float32)
    placed: List[tuple] = []
    radii: List[float] = []
    for _ in range(config.count):
        for _ in range(config.max_attempts):
            row = int(rng.choice(height, p=row_weights))
            y = row + rng.uniform(0.0, 1.0)
            x = rng.uniform(0.0, width)
            radius = config.head_scale * row_values[row]
            if (
                x - radius < 0 or x + radius > width
                or y - radius < 0 or y + radius > height
            ):
                continue
            if all(
                np.hypot(x - px, y - py) >= radius + pr + HEAD_GAP
                for px, py, pr in placed
            ):
                placed.append((x, y, radius))
                radii.append(float(radius))
                color = rng.uniform(0.5, 1.0, size=3).astype(np.float32)
                _render_disc(image, x, y, radius, color)
                break

    if len(placed) < config.count:
        logger.warning(
            "Placed %d of %d heads (seed %d)", len(placed), config.count, seed
        )
    dots = as_dots([(x, y) for x, y, _ in placed])
    metadata = SceneMetadataSchema(
        height=height,
        width=width,
        seed=seed,
        requested_count=config.count,
        placed_count=len(placed),
        head_scale=config.head_scale,
        perspective_base=config.perspective_base,
        perspective_slope=config.slope,
        radii=radii,
    )
    return Scene(
        image=image,
        dots=dots,
        gt_density=make_density(dots, height, width),
        gt_perspective=perspective,
        metadata=metadata,
    )


def derive_seeds(seed: int, n: int) -> List[int]:
    """Independent per-item seeds spawned from one root seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(child.generate_state(1)[0]) for child in children]


def synth_dataset(
    n: int,
    config: SceneConfigSchema,
    seed: int,
    threads: Optional[int] = None,
) -> List[Scene]:
    """n scenes with derived seeds; the order does not depend on threads."""
    if n < 1:
        raise InvalidArgumentError(f"Dataset size must be positive, got {n}.")
    return parallel_map(
        lambda scene_seed: synth_scene_from_config(config, scene_seed),
        derive_seeds(seed, n),
        threads,
    )


def apply_roi(scene: Scene, roi: np.ndarray) -> Scene:
    """Zero image and density outside the region of interest."""
    roi = np.asarray(roi, dtype=bool)
    if roi.shape != scene.gt_density.shape:
        raise ShapeMismatchError(
            f"ROI shape {roi.shape} does not match scene shape "
            f"{scene.gt_density.shape}."
        )
    return replace(
        scene,
        image=np.where(roi[None], scene.image, 0).astype(scene.image.dtype),
        gt_density=np.where(roi, scene.gt_density, 0).astype(
            scene.gt_density.dtype
        ),
        roi=roi,
        metadata=scene.metadata.model_copy(update={"has_roi": True}),
    )
