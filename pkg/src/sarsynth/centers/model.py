"""Scattering-center (M3D) data model and its file formats."""
from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ..scene.geometry import AcquisitionGeometry, image_coordinates, los_frame
from ..sbr.contributions import coherent_sum

KINDS = ("diffuse", "plate", "dihedral", "trihedral")
PATTERNS = ("isotropic", "sinc2d", "cospow")

M3D_MAGIC = b"M3D\0"
M3D_VERSION = 1
_HEADER = struct.Struct("<4sIQI")
_RECORD = np.dtype([
    ("kind", "<u1"),
    ("coherent", "<u1"),
    ("pattern", "<u1"),
    ("pad", "<u1"),
    ("position", "<f8", 3),
    ("amp", "<f8", 2),
    ("extent", "<f8", 2),
    ("axis1", "<f8", 3),
    ("axis2", "<f8", 3),
    ("pattern_param", "<f8"),
])


@dataclass(frozen=True)
class DetectionConfig:
    specular_tolerance: float = 1.0
    orthogonality_tolerance: float = 3.0
    buffer_resolution: int = 1024
    min_effective_area: float = 1e-4
    visibility: str = "depth-buffer"
    fill_cell: float = 0.5
    incidence_exponent: float = 1.0
    trihedral_power: float = 4.0

    def __post_init__(self):
        if self.specular_tolerance <= 0 or self.orthogonality_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.buffer_resolution < 64:
            raise ValueError("buffer resolution must be >= 64")
        if self.visibility not in ("depth-buffer", "exact-clipping"):
            raise ValueError("visibility must be 'depth-buffer' or 'exact-clipping'")
        if self.fill_cell <= 0:
            raise ValueError("fill_cell must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class Scatterer:
    kind: str
    position: np.ndarray
    amplitude: complex
    extent: tuple[float, float] = (0.0, 0.0)
    pattern: str = "isotropic"
    axis1: np.ndarray = field(default_factory=lambda: np.zeros(3))
    axis2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    pattern_param: float = 0.0
    coherent: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scatterer kind {self.kind!r}")
        if self.pattern not in PATTERNS:
            raise ValueError(f"unknown directivity pattern {self.pattern!r}")
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        object.__setattr__(self, "axis1", np.asarray(self.axis1, dtype=float).reshape(3))
        object.__setattr__(self, "axis2", np.asarray(self.axis2, dtype=float).reshape(3))
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    @property
    def rcs(self) -> float:
        return abs(self.amplitude) ** 2

    def directivity(self, geom: AcquisitionGeometry) -> float:
        """Amplitude pattern factor at ``geom`` (1 for the detection geometry of a face-on effect)."""
        if self.pattern == "isotropic":
            return 1.0
        u, _, _ = los_frame(geom)
        k = geom.wavenumber
        if self.pattern == "sinc2d":
            a, b = self.extent
            return float(np.sinc(k * a * (u @ self.axis1) / np.pi) * np.sinc(k * b * (u @ self.axis2) / np.pi))
        # cospow: wide cone about axis1
        c = max(float(u @ self.axis1), 0.0)
        return c ** self.pattern_param


@dataclass
class M3dModel:
    scatterers: list[Scatterer]
    geometry: AcquisitionGeometry
    config: DetectionConfig = field(default_factory=DetectionConfig)
    seed: int = 0

    def __len__(self) -> int:
        return len(self.scatterers)

    def counts(self) -> dict[str, int]:
        out = {k: 0 for k in KINDS}
        for s in self.scatterers:
            out[s.kind] += 1
        return out

    def of_kind(self, kind: str) -> list[Scatterer]:
        return [s for s in self.scatterers if s.kind == kind]

    def with_scatterers(self, scatterers) -> "M3dModel":
        return replace(self, scatterers=list(scatterers))

    def coherent_rcs(self, geom: AcquisitionGeometry | None = None) -> float:
        """|sum of coherent amplitudes|^2 with range phase, diffuse terms excluded."""
        geom = geom or self.geometry
        pts = [s for s in self.scatterers if s.coherent]
        if not pts:
            return 0.0
        amp, rng, _ = render_terms(pts, geom)
        z = amp * np.exp(-2j * geom.wavenumber * rng)
        return abs(coherent_sum(z)) ** 2

    def summary(self, top: int = 10) -> dict:
        order = sorted(range(len(self)), key=lambda i: -abs(self.scatterers[i].amplitude))[:top]
        return {
            "geometry": self.geometry.to_dict(),
            "seed": self.seed,
            "config": self.config.to_dict(),
            "counts": self.counts(),
            "top": [
                {
                    "kind": self.scatterers[i].kind,
                    "position": [round(float(x), 6) for x in self.scatterers[i].position],
                    "rcs_dbsm": round(10 * np.log10(max(self.scatterers[i].rcs, 1e-300)), 3),
                }
                for i in order
            ],
        }


def render_terms(scatterers, geom: AcquisitionGeometry):
    """Per-scatterer (amplitude x directivity, range, cross-range) at ``geom``."""
    if not scatterers:
        return np.zeros(0, complex), np.zeros(0), np.zeros(0)
    pos = np.array([s.position for s in scatterers])
    amp = np.array([s.amplitude * s.directivity(geom) for s in scatterers], dtype=complex)
    rng, crs = image_coordinates(pos, geom)
    return amp, rng, crs


# --------------------------------------------------------------------------
# binary format

def write_m3d(model: M3dModel, path) -> None:
    """Write the versioned little-endian M3D file.

    Layout: header (magic, version, record count, metadata length), UTF-8
    JSON metadata (geometry, detection config, seed), then fixed records.
    """
    meta = json.dumps({
        "geometry": model.geometry.to_dict(),
        "config": model.config.to_dict(),
        "seed": model.seed,
    }, sort_keys=True).encode("utf-8")
    rec = np.zeros(len(model), dtype=_RECORD)
    for i, s in enumerate(model.scatterers):
        rec[i]["kind"] = KINDS.index(s.kind)
        rec[i]["coherent"] = int(s.coherent)
        rec[i]["pattern"] = PATTERNS.index(s.pattern)
        rec[i]["position"] = s.position
        rec[i]["amp"] = (s.amplitude.real, s.amplitude.imag)
        rec[i]["extent"] = s.extent
        rec[i]["axis1"] = s.axis1
        rec[i]["axis2"] = s.axis2
        rec[i]["pattern_param"] = s.pattern_param
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(M3D_MAGIC, M3D_VERSION, len(model), len(meta)))
        fh.write(meta)
        fh.write(rec.tobytes())


def read_m3d(path) -> M3dModel:
    data = Path(path).read_bytes()
    magic, version, count, mlen = _HEADER.unpack_from(data, 0)
    if magic != M3D_MAGIC:
        raise ValueError(f"{path}: not an M3D file")
    if version != M3D_VERSION:
        raise ValueError(f"{path}: unsupported M3D version {version}")
    meta = json.loads(data[_HEADER.size:_HEADER.size + mlen].decode("utf-8"))
    rec = np.frombuffer(data, dtype=_RECORD, count=count, offset=_HEADER.size + mlen)
    scat = [
        Scatterer(
            KINDS[r["kind"]], r["position"].copy(), complex(r["amp"][0], r["amp"][1]),
            (float(r["extent"][0]), float(r["extent"][1])), PATTERNS[r["pattern"]],
            r["axis1"].copy(), r["axis2"].copy(), float(r["pattern_param"]), bool(r["coherent"]),
        )
        for r in rec
    ]
    return M3dModel(scat, AcquisitionGeometry.from_dict(meta["geometry"]), DetectionConfig(**meta["config"]), meta["seed"])


def write_summary(model: M3dModel, path) -> None:
    Path(path).write_text(json.dumps(model.summary(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
