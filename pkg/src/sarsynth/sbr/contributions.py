"""Ray contributions: container, coherent reductions and the binary dump format."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..scene.geometry import CHANNELS, AcquisitionGeometry

DUMP_MAGIC = b"SBRC"
DUMP_VERSION = 1
_HEADER = struct.Struct("<4sIQIddd2s")
_RECORD = np.dtype([
    ("amp", "<f4", (len(CHANNELS), 2)),
    ("path", "<f4"),
    ("range", "<f4"),
    ("cross", "<f4"),
    ("bounces", "<i4"),
    ("first", "<i4"),
    ("last", "<i4"),
])


@dataclass
class Contributions:
    """Structure-of-arrays list of SBR ray contributions.

    ``amplitude[:, ch]`` is the complex contribution (sqrt(m^2)) for channel
    ``CHANNELS[ch]``; its phase is ``-k * path_length`` folded with the
    scattering coefficients. ``chain`` lists the facet ids of each path,
    padded with -1.
    """

    amplitude: np.ndarray
    path_length: np.ndarray
    range: np.ndarray
    cross_range: np.ndarray
    bounces: np.ndarray
    chain: np.ndarray
    geometry: AcquisitionGeometry | None = None
    launch_distance: float = 0.0
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.amplitude.shape[0]

    @classmethod
    def empty(cls, max_bounces: int = 1, geometry: AcquisitionGeometry | None = None) -> "Contributions":
        return cls(
            np.zeros((0, len(CHANNELS)), complex), np.zeros(0), np.zeros(0), np.zeros(0),
            np.zeros(0, np.int32), np.zeros((0, max_bounces), np.int32), geometry,
        )

    @property
    def first_facet(self) -> np.ndarray:
        return self.chain[:, 0] if len(self) else np.zeros(0, np.int32)

    @property
    def last_facet(self) -> np.ndarray:
        if not len(self):
            return np.zeros(0, np.int32)
        return self.chain[np.arange(len(self)), self.bounces - 1]

    def references(self, facet: int) -> np.ndarray:
        """Mask of contributions whose path touches ``facet``."""
        return np.any(self.chain == facet, axis=1)

    def take(self, idx) -> "Contributions":
        idx = np.asarray(idx)
        return Contributions(
            self.amplitude[idx], self.path_length[idx], self.range[idx], self.cross_range[idx],
            self.bounces[idx], self.chain[idx], self.geometry, self.launch_distance, dict(self.meta),
        )

    def channel(self, ch: int | str | None = None) -> np.ndarray:
        if ch is None:
            ch = self.geometry.channel if self.geometry is not None else 0
        if isinstance(ch, str):
            ch = CHANNELS.index(ch.upper())
        return self.amplitude[:, ch]


def concatenate(parts: list[Contributions], max_bounces: int, geometry=None, launch_distance=0.0) -> Contributions:
    parts = [p for p in parts if len(p)]
    if not parts:
        out = Contributions.empty(max_bounces, geometry)
        out.launch_distance = launch_distance
        return out
    return Contributions(
        np.concatenate([p.amplitude for p in parts]),
        np.concatenate([p.path_length for p in parts]),
        np.concatenate([p.range for p in parts]),
        np.concatenate([p.cross_range for p in parts]),
        np.concatenate([p.bounces for p in parts]),
        np.concatenate([p.chain for p in parts]),
        geometry,
        launch_distance,
    )


def coherent_sum(values) -> complex:
    """Exactly rounded complex sum, hence independent of input order."""
    v = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(v.real), math.fsum(v.imag))


def rcs_estimate(contribs: Contributions, channel: int | str | None = None) -> float:
    """Coherent monostatic RCS (m^2) of a contribution list; 0 when empty."""
    if len(contribs) == 0:
        return 0.0
    return abs(coherent_sum(contribs.channel(channel))) ** 2


def to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


# --------------------------------------------------------------------------
# dump format

def write_dump(contribs: Contributions, path) -> None:
    """Write the versioned little-endian contribution dump.

    Header: magic, version, record count, channel count, frequency (Hz),
    azimuth, depression (deg), tx/rx polarization letters. Records: float32
    re/im per channel, path length, range, cross-range; int32 bounces,
    first and last facet id.
    """
    g = contribs.geometry
    freq, az, dep, pol = (g.frequency, g.azimuth, g.depression, (g.tx + g.rx).encode()) if g else (0.0, 0.0, 0.0, b"HH")
    rec = np.zeros(len(contribs), dtype=_RECORD)
    rec["amp"][..., 0] = contribs.amplitude.real
    rec["amp"][..., 1] = contribs.amplitude.imag
    rec["path"] = contribs.path_length
    rec["range"] = contribs.range
    rec["cross"] = contribs.cross_range
    rec["bounces"] = contribs.bounces
    rec["first"] = contribs.first_facet
    rec["last"] = contribs.last_facet
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(DUMP_MAGIC, DUMP_VERSION, len(contribs), len(CHANNELS), freq, az, dep, pol))
        fh.write(rec.tobytes())


def read_dump(path) -> Contributions:
    data = Path(path).read_bytes()
    magic, version, count, nch, freq, az, dep, pol = _HEADER.unpack_from(data, 0)
    if magic != DUMP_MAGIC:
        raise ValueError(f"{path}: not a contribution dump")
    if version != DUMP_VERSION or nch != len(CHANNELS):
        raise ValueError(f"{path}: unsupported dump version {version} / {nch} channels")
    rec = np.frombuffer(data, dtype=_RECORD, count=count, offset=_HEADER.size)
    amp = rec["amp"][..., 0].astype(float) + 1j * rec["amp"][..., 1].astype(float)
    bounces = rec["bounces"].astype(np.int32)
    # only the path ends survive the dump; interior facets come back as -1
    chain = np.full((count, max(1, int(bounces.max(initial=1)))), -1, np.int32)
    chain[:, 0] = rec["first"]
    chain[np.arange(count), np.maximum(bounces, 1) - 1] = rec["last"]
    geom = AcquisitionGeometry(az, dep, freq, pol.decode()[0], pol.decode()[1]) if freq > 0 else None
    out = Contributions(
        amp, rec["path"].astype(float), rec["range"].astype(float), rec["cross"].astype(float),
        bounces, chain, geom,
    )
    return out
