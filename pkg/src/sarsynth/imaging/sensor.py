"""Sensor transfer function: IPR convolution, thermal noise and decimation to the chip grid."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ipr import SensorModel, axis_spectrum
from .raster import SourceImage


@dataclass
class RadarChip:
    """Complex chip at the output spacing plus the metadata that produced it."""

    data: np.ndarray
    spacing: float
    meta: dict = field(default_factory=dict)

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.data)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def _spectra(sensor: SensorModel, shape, spacing):
    hr = axis_spectrum(sensor, sensor.range_resolution, shape[0], spacing)
    hc = axis_spectrum(sensor, sensor.cross_resolution, shape[1], spacing)
    return hr, hc


def kernel_energy(sensor: SensorModel, shape, spacing) -> float:
    """Sum of |h|^2 of the separable kernel on a padded grid of ``shape`` (Parseval)."""
    hr, hc = _spectra(sensor, shape, spacing)
    return float(np.sum(hr ** 2) / hr.size * np.sum(hc ** 2) / hc.size)


def noise_power(sensor: SensorModel, source: SourceImage) -> float:
    """Per-pixel chip noise power: the level a clutter of reflectivity NESigma0 would give."""
    padded = (2 * source.shape[0], 2 * source.shape[1])
    p = sensor.calibration ** 2 * sensor.nesigma0 * source.pixel_ground_area * kernel_energy(
        sensor, padded, source.range_spacing)
    if not np.isfinite(p):
        raise ValueError(f"NESigma0 {sensor.nesigma0_db} dB gives a non-finite noise power")
    return p


def convolve(source: np.ndarray, sensor: SensorModel, spacing: float) -> np.ndarray:
    """Linear convolution with the IPR by spectral multiplication.

    The grid is zero-padded to twice its size (one kernel period of guard
    band) and cropped back, so nothing wraps around.
    """
    n0, n1 = source.shape
    hr, hc = _spectra(sensor, (2 * n0, 2 * n1), spacing)
    S = np.fft.fft2(source, s=(2 * n0, 2 * n1))
    return np.fft.ifft2(S * np.outer(hr, hc))[:n0, :n1]


def apply_sensor(source: SourceImage, clutter: np.ndarray | None, sensor: SensorModel,
                 noise_seed: int | None) -> RadarChip:
    """Source (+ clutter) -> IPR -> calibration -> thermal noise -> decimation.

    ``noise_seed=None`` switches thermal noise off. Noise is white and
    circular Gaussian; drawing it on the decimated grid is equivalent to
    drawing it on every source pixel and keeping one in ``oversampling``.
    """
    if abs(source.range_spacing - source.cross_spacing) > 1e-12 * source.range_spacing:
        raise ValueError("source grid must have equal range and cross-range spacing")
    os_ = int(source.oversampling)
    if abs(source.range_spacing * os_ - sensor.pixel_spacing) > 1e-9 * sensor.pixel_spacing:
        raise ValueError(
            f"spacing mismatch: source {source.range_spacing} m x {os_} != sensor pixel {sensor.pixel_spacing} m"
        )
    data = source.data
    if clutter is not None:
        clutter = np.asarray(clutter)
        if clutter.shape != data.shape:
            raise ValueError(f"clutter grid {clutter.shape} does not match source grid {data.shape}")
        data = data + clutter
    img = convolve(data, sensor, source.range_spacing) * sensor.calibration
    chip = img[::os_, ::os_].copy()
    if noise_seed is not None:
        p = noise_power(sensor, source)
        rng = np.random.default_rng(noise_seed)
        chip += np.sqrt(p / 2.0) * (rng.standard_normal(chip.shape) + 1j * rng.standard_normal(chip.shape))
    meta = {"sensor": sensor.to_dict(), "noise_seed": noise_seed, "oversampling": os_}
    meta.update(source.meta)
    if source.geometry is not None:
        meta["geometry"] = source.geometry.to_dict()
    return RadarChip(chip, source.range_spacing * os_, meta)
