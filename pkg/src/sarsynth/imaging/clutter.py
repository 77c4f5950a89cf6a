"""Statistical background clutter, added to the source image before the sensor function."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

FAMILIES = ("rayleigh", "weibull", "k")


@dataclass(frozen=True)
class ClutterModel:
    """Clutter family, mean reflectivity ``sigma0_db`` and family shape.

    ``shape`` is the Weibull shape ``k`` (2 gives Rayleigh magnitudes) or the
    K-distribution order ``nu`` (large values approach Rayleigh). Rayleigh
    ignores it.
    """

    family: str = "rayleigh"
    sigma0_db: float = -20.0
    shape: float = 2.0

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in FAMILIES:
            raise ValueError(f"unknown clutter family {self.family!r}; choose from {FAMILIES}")
        object.__setattr__(self, "family", fam)
        if fam != "rayleigh" and not (np.isfinite(self.shape) and self.shape > 0):
            raise ValueError(f"{fam} clutter needs a positive shape parameter, got {self.shape}")
        if not np.isfinite(self.sigma0_db):
            raise ValueError("clutter sigma0 must be finite")

    @property
    def sigma0(self) -> float:
        return 10.0 ** (self.sigma0_db / 10.0)

    def to_dict(self) -> dict:
        return asdict(self)


def synth_clutter(model: ClutterModel, shape: tuple[int, int], pixel_area: float, seed: int) -> np.ndarray:
    """I.i.d. complex clutter with mean power ``sigma0 * pixel_area`` per pixel."""
    rng = np.random.default_rng(seed)
    power = model.sigma0 * pixel_area
    if model.family == "rayleigh":
        z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        return z * np.sqrt(power / 2.0)
    phase = np.exp(1j * rng.uniform(0.0, 2 * np.pi, shape))
    if model.family == "weibull":
        k = model.shape
        scale = np.sqrt(power / gamma_fn(1.0 + 2.0 / k))
        return scale * rng.weibull(k, shape) * phase
    nu = model.shape
    texture = rng.gamma(nu, 1.0 / nu, shape)
    speckle = np.abs(rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
    return np.sqrt(power * texture) * speckle * phase
