"""Triangle meshes: loading, validation and simple transforms."""
from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .materials import PEC, Material

log = logging.getLogger(__name__)

# Facets below this area are dropped at load time.
DEGENERATE_AREA = 1e-12


class MeshError(ValueError):
    """Raised for unreadable or unusable mesh input."""


@dataclass(frozen=True, eq=False)
class TargetMesh:
    """Immutable triangle soup with per-facet normals, areas and materials.

    ``triangles`` has shape (n, 3, 3) in meters; normals follow the
    right-hand winding ``(v1 - v0) x (v2 - v0)``.
    """

    triangles: np.ndarray
    material_ids: np.ndarray
    materials: tuple[Material, ...]
    groups: np.ndarray | None = None
    group_names: tuple[str, ...] = ()
    dropped: int = 0

    def __post_init__(self):
        tri = np.ascontiguousarray(self.triangles, dtype=np.float64).reshape(-1, 3, 3)
        tri.setflags(write=False)
        object.__setattr__(self, "triangles", tri)
        mids = np.ascontiguousarray(self.material_ids, dtype=np.int32).reshape(-1)
        if mids.shape[0] != tri.shape[0]:
            raise MeshError("material_ids length does not match facet count")
        if mids.size and (mids.min() < 0 or mids.max() >= len(self.materials)):
            raise MeshError("material id out of range of the material table")
        mids.setflags(write=False)
        object.__setattr__(self, "material_ids", mids)
        if self.groups is None:
            object.__setattr__(self, "groups", np.zeros(tri.shape[0], dtype=np.int32))
            if not self.group_names:
                object.__setattr__(self, "group_names", ("default",))
        if not np.all(np.isfinite(tri)):
            raise MeshError("mesh contains non-finite vertices")
        cross = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        norm = np.linalg.norm(cross, axis=1)
        if np.any(norm <= 0.0):
            raise MeshError("mesh contains zero-area facets")
        normals = cross / norm[:, None]
        normals.setflags(write=False)
        area = 0.5 * norm
        area.setflags(write=False)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "areas", area)

    def __len__(self) -> int:
        return self.triangles.shape[0]

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    @property
    def vertices(self) -> np.ndarray:
        return self.triangles.reshape(-1, 3)

    @property
    def centroids(self) -> np.ndarray:
        return self.triangles.mean(axis=1)

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        if self.is_empty:
            return np.zeros(3), np.zeros(3)
        v = self.vertices
        return v.min(axis=0), v.max(axis=0)

    @property
    def diagonal(self) -> float:
        lo, hi = self.bbox
        return float(np.linalg.norm(hi - lo))

    @property
    def total_area(self) -> float:
        return float(self.areas.sum())

    def material_of(self, facet: int) -> Material:
        return self.materials[self.material_ids[facet]]

    def translated(self, offset) -> "TargetMesh":
        return self._with_triangles(self.triangles + np.asarray(offset, dtype=float))

    def rotated_z(self, angle_deg: float) -> "TargetMesh":
        a = np.deg2rad(angle_deg)
        rot = np.array([[np.cos(a), -np.sin(a), 0.0], [np.sin(a), np.cos(a), 0.0], [0.0, 0.0, 1.0]])
        return self.transformed(rot)

    def transformed(self, matrix: np.ndarray) -> "TargetMesh":
        """Apply a proper rotation (det +1) about the origin."""
        m = np.asarray(matrix, dtype=float)
        return self._with_triangles(self.triangles @ m.T)

    def centered(self, on_ground: bool = True) -> "TargetMesh":
        """Move the bbox centroid to the origin.

        With ``on_ground`` the mesh is instead centered horizontally and
        lifted so that its lowest point sits at ``z = 0``.
        """
        lo, hi = self.bbox
        off = -(lo + hi) / 2.0
        if on_ground:
            off[2] = -lo[2]
        return self.translated(off)

    def subset(self, keep) -> "TargetMesh":
        keep = np.asarray(keep)
        return TargetMesh(
            self.triangles[keep],
            self.material_ids[keep],
            self.materials,
            self.groups[keep],
            self.group_names,
        )

    def _with_triangles(self, tri: np.ndarray) -> "TargetMesh":
        return TargetMesh(tri, self.material_ids, self.materials, self.groups, self.group_names, self.dropped)


def merge_meshes(*meshes: TargetMesh) -> TargetMesh:
    """Concatenate meshes; facet ids follow argument order."""
    materials: list[Material] = []
    tris, mids, groups, names = [], [], [], []
    for m in meshes:
        remap = []
        for mat in m.materials:
            if mat not in materials:
                materials.append(mat)
            remap.append(materials.index(mat))
        remap = np.asarray(remap, dtype=np.int32)
        tris.append(m.triangles)
        mids.append(remap[m.material_ids] if len(m) else np.zeros(0, np.int32))
        groups.append(m.groups + len(names))
        names.extend(m.group_names)
    if not materials:
        materials = [PEC]
    return TargetMesh(
        np.concatenate(tris) if tris else np.zeros((0, 3, 3)),
        np.concatenate(mids) if mids else np.zeros(0, np.int32),
        tuple(materials),
        np.concatenate(groups) if groups else np.zeros(0, np.int32),
        tuple(names),
    )


def mesh_from_triangles(triangles, material: Material = PEC) -> TargetMesh:
    tri = np.asarray(triangles, dtype=float).reshape(-1, 3, 3)
    return TargetMesh(tri, np.zeros(len(tri), np.int32), (material,))


# --------------------------------------------------------------------------
# file readers

def _read_obj(path: Path) -> tuple[np.ndarray, list[str]]:
    verts: list[list[float]] = []
    faces: list[tuple[int, int, int]] = []
    face_groups: list[str] = []
    group = "default"
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, line in enumerate(fh, 1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            try:
                if tag == "v":
                    verts.append([float(p) for p in parts[1:4]])
                    if len(verts[-1]) != 3:
                        raise ValueError("vertex needs 3 coordinates")
                elif tag == "f":
                    idx = []
                    for p in parts[1:]:
                        i = int(p.split("/")[0])
                        idx.append(i - 1 if i > 0 else len(verts) + i)
                    if len(idx) < 3:
                        raise ValueError("face needs at least 3 vertices")
                    for k in range(1, len(idx) - 1):
                        faces.append((idx[0], idx[k], idx[k + 1]))
                        face_groups.append(group)
                elif tag in ("g", "o"):
                    group = " ".join(parts[1:]) or "default"
            except ValueError as exc:
                raise MeshError(f"{path}:{lineno}: {exc}") from exc
    if not faces:
        raise MeshError(f"{path}: no faces found")
    v = np.asarray(verts, dtype=float)
    f = np.asarray(faces, dtype=np.int64)
    if f.min() < 0 or f.max() >= len(v):
        raise MeshError(f"{path}: face references a missing vertex")
    return v[f], face_groups


def _read_stl(path: Path) -> np.ndarray:
    data = path.read_bytes()
    if len(data) >= 84:
        (count,) = struct.unpack_from("<I", data, 80)
        if len(data) == 84 + 50 * count:
            rec = np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
            arr = np.frombuffer(data, dtype=rec, count=count, offset=84)
            return arr["v"].astype(np.float64)
    text = data.decode("ascii", errors="replace")
    if text.lstrip().startswith("solid"):
        verts = [[float(x) for x in line.split()[1:4]] for line in text.splitlines() if line.strip().startswith("vertex")]
        if verts and len(verts) % 3 == 0:
            return np.asarray(verts, dtype=float).reshape(-1, 3, 3)
    raise MeshError(f"{path}: not a readable STL file")


def _stl_groups(path: Path, n: int) -> list[str]:
    """Facet groups for STL files from an optional ``<name>.groups.yaml`` sidecar.

    The sidecar maps group name -> list of ``[start, stop)`` facet ranges.
    """
    sidecar = path.with_suffix(".groups.yaml")
    groups = ["default"] * n
    if sidecar.exists():
        table = yaml.safe_load(sidecar.read_text(encoding="utf-8")) or {}
        for name, ranges in table.items():
            for start, stop in ranges:
                for i in range(int(start), min(int(stop), n)):
                    groups[i] = str(name)
    return groups


def load_mesh(path, unit_scale: float = 1.0, material_map: dict[str, Material] | None = None) -> TargetMesh:
    """Load a Wavefront OBJ or STL mesh, scaled to meters.

    ``material_map`` binds facet group names to materials; the key ``"*"``
    is a fallback for unlisted groups, otherwise they are PEC. Facets with
    area below 1e-12 m^2 are dropped and counted in ``mesh.dropped``.
    """
    path = Path(path)
    if unit_scale <= 0.0 or not np.isfinite(unit_scale):
        raise MeshError("unit_scale must be positive")
    if not path.exists():
        raise MeshError(f"{path}: no such file")
    suffix = path.suffix.lower()
    if suffix == ".obj":
        tri, face_groups = _read_obj(path)
    elif suffix == ".stl":
        tri = _read_stl(path)
        face_groups = _stl_groups(path, len(tri))
    else:
        raise MeshError(f"{path}: unsupported mesh format {suffix!r}")
    tri = tri * unit_scale

    material_map = dict(material_map or {})
    group_names = tuple(dict.fromkeys(face_groups))
    missing = [g for g in material_map if g != "*" and g not in group_names]
    if missing:
        raise MeshError(f"{path}: material_map references absent facet groups {missing}")

    area = 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    keep = np.isfinite(area) & (area >= DEGENERATE_AREA)
    dropped = int((~keep).sum())
    if not keep.any():
        raise MeshError(f"{path}: all {len(tri)} facets are degenerate")
    if dropped:
        log.info("%s: dropped %d degenerate facets", path, dropped)

    fallback = material_map.get("*", PEC)
    mats: list[Material] = []
    group_mat = []
    for g in group_names:
        m = material_map.get(g, fallback)
        if m not in mats:
            mats.append(m)
        group_mat.append(mats.index(m))
    gidx = np.array([group_names.index(g) for g in face_groups], dtype=np.int32)
    mids = np.asarray(group_mat, dtype=np.int32)[gidx]
    return TargetMesh(tri[keep], mids[keep], tuple(mats), gidx[keep], group_names, dropped)


def save_obj(mesh: TargetMesh, path) -> None:
    """Write ``mesh`` as OBJ with one ``g`` block per facet group."""
    with open(path, "w", encoding="utf-8") as fh:
        n = 0
        for gi, name in enumerate(mesh.group_names):
            sel = np.flatnonzero(mesh.groups == gi)
            if sel.size == 0:
                continue
            fh.write(f"g {name}\n")
            for t in mesh.triangles[sel]:
                for v in t:
                    fh.write("v {!r} {!r} {!r}\n".format(*map(float, v)))
                fh.write(f"f {n + 1} {n + 2} {n + 3}\n")
                n += 3


def save_stl(mesh: TargetMesh, path) -> None:
    rec = np.zeros(len(mesh), dtype=[("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    rec["n"] = mesh.normals
    rec["v"] = mesh.triangles
    with open(path, "wb") as fh:
        fh.write(b"sarsynth binary stl".ljust(80, b"\0"))
        fh.write(struct.pack("<I", len(mesh)))
        fh.write(rec.tobytes())
