"""Rough ground patches by Gaussian spectral synthesis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .materials import Material
from .mesh import TargetMesh

GROUND = Material("ground", kind="dielectric", permittivity=complex(6.0, -0.6), reflectivity=1.0, sigma0_db=-15.0)


@dataclass(frozen=True)
class GroundPatch:
    extent: float
    spacing: float
    rms_height: float
    correlation_length: float
    seed: int = 0
    material: Material = GROUND

    @property
    def nodes(self) -> int:
        return int(round(self.extent / self.spacing)) + 1


def ground_heights(patch: GroundPatch) -> np.ndarray:
    """Height samples (n, n) with Gaussian statistics and Gaussian correlation.

    The spectral filter is normalised so the expected variance equals
    ``rms_height**2`` exactly; the sample variance fluctuates around it.
    """
    if patch.extent <= 0 or patch.spacing <= 0 or patch.correlation_length <= 0:
        raise ValueError("extent, spacing and correlation length must be positive")
    if patch.rms_height < 0:
        raise ValueError("rms height must be non-negative")
    if patch.spacing >= patch.extent:
        raise ValueError("grid spacing must be smaller than the patch extent")
    if patch.correlation_length < 2.0 * patch.spacing:
        raise ValueError("correlation length below two grid spacings aliases the spectrum")
    n = patch.nodes
    if patch.rms_height == 0.0:
        return np.zeros((n, n))
    rng = np.random.default_rng(patch.seed)
    white = rng.standard_normal((n, n))
    k = 2.0 * np.pi * np.fft.fftfreq(n, d=patch.spacing)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    # Gaussian correlation exp(-r^2/l^2) <-> spectrum exp(-k^2 l^2 / 4)
    amp = np.exp(-(kx**2 + ky**2) * patch.correlation_length**2 / 8.0)
    amp /= np.sqrt(np.mean(amp**2))
    field = np.fft.ifft2(np.fft.fft2(white) * amp).real
    return patch.rms_height * field


def synthesize_rough_ground(patch: GroundPatch) -> TargetMesh:
    """Triangulated heightfield centered on the origin, normals pointing up."""
    h = ground_heights(patch)
    n = h.shape[0]
    coords = (np.arange(n) - (n - 1) / 2.0) * patch.spacing
    x, y = np.meshgrid(coords, coords, indexing="ij")
    pts = np.stack([x, y, h], axis=-1)
    p00 = pts[:-1, :-1].reshape(-1, 3)
    p10 = pts[1:, :-1].reshape(-1, 3)
    p01 = pts[:-1, 1:].reshape(-1, 3)
    p11 = pts[1:, 1:].reshape(-1, 3)
    t1 = np.stack([p00, p10, p11], axis=1)
    t2 = np.stack([p00, p11, p01], axis=1)
    tri = np.concatenate([t1, t2])
    return TargetMesh(tri, np.zeros(len(tri), np.int32), (patch.material,), group_names=("ground",))
