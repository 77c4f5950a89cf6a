"""8-bit log-magnitude previews."""
from __future__ import annotations

import numpy as np
from PIL import Image

from .sensor import RadarChip


def to_preview(chip: RadarChip | np.ndarray, dynamic_range: float = 50.0, reference: float | None = None) -> np.ndarray:
    """Map 20 log10 |chip| onto 0..255 over ``dynamic_range`` dB below ``reference``.

    ``reference`` defaults to the chip peak, which makes the preview
    invariant to a global amplitude scale. An all-zero chip is black.
    """
    mag = np.abs(chip.data if isinstance(chip, RadarChip) else np.asarray(chip))
    if mag.size == 0:
        raise ValueError("empty chip")
    ref = float(mag.max()) if reference is None else float(reference)
    if ref <= 0:
        return np.zeros(mag.shape, np.uint8)
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / ref)
    level = np.clip((db + dynamic_range) / dynamic_range, 0.0, 1.0)
    return np.round(level * 255.0).astype(np.uint8)


def save_preview(chip, path, dynamic_range: float = 50.0) -> None:
    Image.fromarray(to_preview(chip, dynamic_range), mode="L").save(path, format="PNG")
