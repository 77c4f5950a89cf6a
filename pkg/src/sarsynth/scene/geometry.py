"""Acquisition geometry and the line-of-sight frame.

Conventions (shared by every paradigm):

* right-handed target frame, ``z`` up;
* azimuth measured from ``+x`` toward ``+y``;
* depression measured above the horizon, from the scene toward the sensor.

Angles are degrees at the boundary and radians internally.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

# Channel order used for every polarimetric amplitude array: (tx, rx).
CHANNELS = ("HH", "HV", "VH", "VV")


def channel_index(tx: str, rx: str) -> int:
    return CHANNELS.index(f"{tx.upper()}{rx.upper()}")


@dataclass(frozen=True)
class AcquisitionGeometry:
    azimuth: float
    depression: float
    frequency: float
    tx: str = "H"
    rx: str = "H"

    def __post_init__(self):
        az = float(self.azimuth) % 360.0
        object.__setattr__(self, "azimuth", az)
        if not np.isfinite(self.depression) or not 0.0 <= self.depression <= 90.0:
            raise ValueError(f"depression must lie in [0, 90] deg, got {self.depression}")
        if not np.isfinite(self.frequency) or self.frequency <= 0.0:
            raise ValueError(f"frequency must be positive, got {self.frequency}")
        for name in ("tx", "rx"):
            pol = getattr(self, name).upper()
            if pol not in ("H", "V"):
                raise ValueError(f"{name} polarization must be H or V, got {pol!r}")
            object.__setattr__(self, name, pol)

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def channel(self) -> int:
        return channel_index(self.tx, self.rx)

    def with_azimuth(self, azimuth: float) -> "AcquisitionGeometry":
        return AcquisitionGeometry(azimuth, self.depression, self.frequency, self.tx, self.rx)

    def to_dict(self) -> dict:
        return {
            "azimuth": self.azimuth,
            "depression": self.depression,
            "frequency": self.frequency,
            "tx": self.tx,
            "rx": self.rx,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AcquisitionGeometry":
        return cls(d["azimuth"], d["depression"], d["frequency"], d.get("tx", "H"), d.get("rx", "H"))


def los_frame(geom: AcquisitionGeometry) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Return the (los, cross-range, third) unit vectors for ``geom``.

    ``los`` points from the scene origin toward the sensor,
    ``cross = normalize(z x los)`` is horizontal, and ``third = los x cross``
    completes a right-handed orthonormal triad (it is the in-image elevation
    axis, perpendicular to the line of sight).

    Raises
    ------
    ValueError
        If the depression is 90 deg; the cross-range axis is undefined there.
    """
    if geom.depression >= 90.0:
        raise ValueError(f"depression {geom.depression} deg leaves the cross-range axis undefined")
    az = np.deg2rad(geom.azimuth)
    de = np.deg2rad(geom.depression)
    u = np.array([np.cos(de) * np.cos(az), np.cos(de) * np.sin(az), np.sin(de)])
    c = np.array([-np.sin(az), np.cos(az), 0.0])
    g = np.cross(u, c)
    g /= np.linalg.norm(g)
    return u, c, g


def image_coordinates(points: np.ndarray, geom: AcquisitionGeometry) -> tuple[np.ndarray, np.ndarray]:
    """Slant-range and cross-range coordinates of 3D ``points`` (m).

    Range grows away from the sensor and is zero at the scene origin.
    """
    u, c, _ = los_frame(geom)
    pts = np.atleast_2d(points)
    return -pts @ u, pts @ c
