"""Canonical test targets: plates, corner reflectors, spheres, boxes, a vehicle proxy."""
from __future__ import annotations

import numpy as np

from .materials import PEC, Material
from .mesh import TargetMesh, merge_meshes


def _quad(p0, du, dv, n_split=1):
    """Triangles tiling the parallelogram ``p0 + s du + t dv``, s, t in [0, 1]."""
    p0, du, dv = (np.asarray(x, dtype=float) for x in (p0, du, dv))
    tris = []
    for i in range(n_split):
        for j in range(n_split):
            a = p0 + du * i / n_split + dv * j / n_split
            b = a + du / n_split
            c = a + du / n_split + dv / n_split
            d = a + dv / n_split
            tris.append([a, b, c])
            tris.append([a, c, d])
    return np.asarray(tris)


def _orient(tris, normal):
    """Flip triangles whose winding normal opposes ``normal``."""
    tris = np.array(tris, dtype=float)
    n = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    flip = n @ np.asarray(normal, dtype=float) < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return tris


def _mesh(tris, material: Material = PEC, group: str = "default") -> TargetMesh:
    tris = np.asarray(tris, dtype=float).reshape(-1, 3, 3)
    return TargetMesh(tris, np.zeros(len(tris), np.int32), (material,), group_names=(group,))


def _tangents(normal):
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    h = np.cross([0.0, 0.0, 1.0], n)
    if np.linalg.norm(h) < 1e-12:
        h = np.array([0.0, 1.0, 0.0])
    h /= np.linalg.norm(h)
    v = np.cross(n, h)
    return n, h, v


def plate(a: float, b: float | None = None, normal=(1.0, 0.0, 0.0), center=(0.0, 0.0, 0.0),
          n_split: int = 1, material: Material = PEC) -> TargetMesh:
    """Rectangular plate, ``a`` along the horizontal in-plane axis, ``b`` along the other."""
    b = a if b is None else b
    n, h, v = _tangents(normal)
    p0 = np.asarray(center, dtype=float) - h * a / 2 - v * b / 2
    return _mesh(_orient(_quad(p0, h * a, v * b, n_split), n), material, "plate")


def dihedral(a: float, b: float, fold_axis: str = "y", n_split: int = 1, angle_deg: float = 90.0,
             material: Material = PEC) -> TargetMesh:
    """Concave two-face corner with its fold through the origin.

    ``fold_axis="y"``: floor in ``z = 0`` (normal +z) over ``x in [0, b]`` and a
    wall (normal toward +x) rising from the fold; bisector ``(1, 0, 1)``.
    ``fold_axis="z"``: walls facing +x and +y along a vertical fold; bisector
    ``(1, 1, 0)``. ``angle_deg`` sets the interior angle between the faces.
    """
    t = np.deg2rad(angle_deg)
    if fold_axis == "y":
        fold = np.array([0.0, 1.0, 0.0])
        d1 = np.array([1.0, 0.0, 0.0])
        d2 = np.array([np.cos(t), 0.0, np.sin(t)])
    elif fold_axis == "z":
        fold = np.array([0.0, 0.0, 1.0])
        d1 = np.array([0.0, 1.0, 0.0])
        d2 = np.array([np.sin(t), np.cos(t), 0.0])
    else:
        raise ValueError("fold_axis must be 'y' or 'z'")
    n1 = np.cross(fold, d1) if fold_axis == "y" else np.cross(d1, fold)
    n2 = -np.cross(fold, d2) if fold_axis == "y" else -np.cross(d2, fold)
    # normals must point into the opening
    if n1 @ d2 < 0:
        n1 = -n1
    if n2 @ d1 < 0:
        n2 = -n2
    p0 = -fold * a / 2
    f1 = _orient(_quad(p0, fold * a, d1 * b, n_split), n1)
    f2 = _orient(_quad(p0, fold * a, d2 * b, n_split), n2)
    return merge_meshes(_mesh(f1, material, "face1"), _mesh(f2, material, "face2"))


def trihedral(a: float, faces=(0, 1, 2), n_split: int = 1, material: Material = PEC) -> TargetMesh:
    """Square-faced corner reflector in the positive octant; boresight ``(1, 1, 1)``.

    ``faces`` selects which coordinate planes are present (0: ``x = 0``, ...).
    """
    parts = []
    e = np.eye(3)
    for k in faces:
        u, v = e[(k + 1) % 3], e[(k + 2) % 3]
        parts.append(_mesh(_orient(_quad(np.zeros(3), u * a, v * a, n_split), e[k]), material, f"face{k}"))
    return merge_meshes(*parts)


def box(size, center=(0.0, 0.0, 0.0), n_split: int = 1, material: Material = PEC) -> TargetMesh:
    """Closed axis-aligned box with outward normals."""
    sx, sy, sz = np.broadcast_to(np.asarray(size, dtype=float), (3,))
    c = np.asarray(center, dtype=float)
    lo = c - np.array([sx, sy, sz]) / 2
    ex, ey, ez = np.diag([sx, sy, sz])
    tris = []
    for p0, du, dv, n in [
        (lo, ey, ez, (-1, 0, 0)), (lo + ex, ey, ez, (1, 0, 0)),
        (lo, ex, ez, (0, -1, 0)), (lo + ey, ex, ez, (0, 1, 0)),
        (lo, ex, ey, (0, 0, -1)), (lo + ez, ex, ey, (0, 0, 1)),
    ]:
        tris.append(_orient(_quad(p0, du, dv, n_split), n))
    return _mesh(np.concatenate(tris), material, "box")


def sphere(radius: float, subdivisions: int = 4, center=(0.0, 0.0, 0.0), material: Material = PEC) -> TargetMesh:
    """Icosphere with outward normals; ``20 * 4**subdivisions`` facets."""
    phi = (1 + 5 ** 0.5) / 2
    verts = [(-1, phi, 0), (1, phi, 0), (-1, -phi, 0), (1, -phi, 0), (0, -1, phi), (0, 1, phi),
             (0, -1, -phi), (0, 1, -phi), (phi, 0, -1), (phi, 0, 1), (-phi, 0, -1), (-phi, 0, 1)]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
             (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
             (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    v = np.asarray(verts, dtype=float)
    v /= np.linalg.norm(v, axis=1)[:, None]
    tris = v[np.asarray(faces)]
    for _ in range(subdivisions):
        a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
        ab, bc, ca = (a + b), (b + c), (c + a)
        ab /= np.linalg.norm(ab, axis=1)[:, None]
        bc /= np.linalg.norm(bc, axis=1)[:, None]
        ca /= np.linalg.norm(ca, axis=1)[:, None]
        tris = np.concatenate([
            np.stack([a, ab, ca], 1), np.stack([ab, b, bc], 1),
            np.stack([ca, bc, c], 1), np.stack([ab, bc, ca], 1),
        ])
    n = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    flip = np.einsum("ij,ij->i", n, tris.mean(axis=1)) < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    return _mesh(tris * radius + np.asarray(center, dtype=float), material, "sphere")


def vehicle(n_lon: int = 96, n_lat: int = 48, length: float = 6.5, width: float = 3.2, height: float = 1.6,
            material: Material = PEC) -> TargetMesh:
    """Tracked-vehicle proxy: superellipsoid hull, box turret, cylindrical barrel.

    The default tessellation yields about 10^4 facets. The hull sits on
    ``z = 0``.
    """
    # superellipsoid hull
    lon = np.linspace(0, 2 * np.pi, n_lon + 1)
    lat = np.linspace(-np.pi / 2, np.pi / 2, n_lat + 1)
    e = 0.35

    def sgnpow(x, p):
        return np.sign(x) * np.abs(x) ** p

    L, T = np.meshgrid(lon, lat, indexing="ij")
    x = length / 2 * sgnpow(np.cos(T), e) * sgnpow(np.cos(L), e)
    y = width / 2 * sgnpow(np.cos(T), e) * sgnpow(np.sin(L), e)
    z = height / 2 * sgnpow(np.sin(T), e) + height / 2
    P = np.stack([x, y, z], -1)
    a, b, c, d = P[:-1, :-1], P[1:, :-1], P[1:, 1:], P[:-1, 1:]
    hull = np.concatenate([np.stack([a, b, c], 2).reshape(-1, 3, 3), np.stack([a, c, d], 2).reshape(-1, 3, 3)])
    area = np.linalg.norm(np.cross(hull[:, 1] - hull[:, 0], hull[:, 2] - hull[:, 0]), axis=1)
    hull = hull[area > 1e-10]
    ctr = np.array([0, 0, height / 2])
    n = np.cross(hull[:, 1] - hull[:, 0], hull[:, 2] - hull[:, 0])
    flip = np.einsum("ij,ij->i", n, hull.mean(axis=1) - ctr) < 0
    hull[flip] = hull[flip][:, [0, 2, 1]]

    turret = box((2.2, 1.9, 0.7), center=(-0.3, 0.0, height + 0.3), n_split=2, material=material)

    # barrel along +x
    k = 24
    ang = np.linspace(0, 2 * np.pi, k + 1)
    r = 0.08
    x0, x1 = 0.8, 4.2
    zc = height + 0.35
    ring0 = np.stack([np.full(k + 1, x0), r * np.cos(ang), zc + r * np.sin(ang)], -1)
    ring1 = ring0 + np.array([x1 - x0, 0, 0])
    segs = []
    for i in range(k):
        segs.append([ring0[i], ring1[i], ring1[i + 1]])
        segs.append([ring0[i], ring1[i + 1], ring0[i + 1]])
    barrel = np.asarray(segs)
    bn = np.cross(barrel[:, 1] - barrel[:, 0], barrel[:, 2] - barrel[:, 0])
    radial = barrel.mean(axis=1) - np.array([0, 0, zc])
    radial[:, 0] = 0
    flip = np.einsum("ij,ij->i", bn, radial) < 0
    barrel[flip] = barrel[flip][:, [0, 2, 1]]
    return merge_meshes(_mesh(hull, material, "hull"), turret, _mesh(barrel, material, "barrel"))
