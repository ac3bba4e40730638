from typing import Optional

import numpy as np

from exceptions import InvalidArgumentError


def synth_perspective(
    height: int,
    width: int,
    base: float,
    slope: float,
    noise_amp: float = 0.0,
    seed: Optional[int] = 0,
) -> np.ndarray:
    """
    Vertical perspective ramp base + slope * row with optional seeded
    uniform noise in [-noise_amp, noise_amp].

    Raises:
        InvalidArgumentError: On empty dimensions, nonpositive base, negative
        noise amplitude or any nonpositive resulting value.
    """
    if height < 1 or width < 1:
        raise InvalidArgumentError(
            f"Map dimensions must be positive, got {height}x{width}."
        )
    if base <= 0:
        raise InvalidArgumentError(f"Base must be positive, got {base}.")
    if noise_amp < 0:
        raise InvalidArgumentError(
            f"Noise amplitude must be nonnegative, got {noise_amp}."
        )

    rows = base + slope * np.arange(height, dtype=np.float64)
    values = np.repeat(rows[:, None], width, axis=1)
    if noise_amp > 0:
        rng = np.random.default_rng(seed)
        values += rng.uniform(-noise_amp, noise_amp, size=(height, width))

    if np.any(values <= 0):
        raise InvalidArgumentError(
            "Perspective values must stay positive; "
            f"minimum is {values.min():.6g}."
        )
    return values.astype(np.float32)
