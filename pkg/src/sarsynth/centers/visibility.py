"""Visible projected area of each facet, seen from the sensor.

Two modes:

``depth-buffer``
    one ray per pixel of a grid on the plane normal to the line of sight,
    nearest hit wins; a pixel credits its area to the facet it lands on if
    that facet faces the sensor.
``exact-clipping``
    polygon clipping in the image plane: every facet's projection minus the
    parts of other facets that lie in front of it.
"""
from __future__ import annotations

import numpy as np
import shapely
from shapely.geometry import Polygon, box as shp_box

from ..scene.bvh import AccelIndex, build_index
from ..scene.geometry import AcquisitionGeometry, los_frame
from ..scene.mesh import TargetMesh
from .model import DetectionConfig


def project(mesh: TargetMesh, geom: AcquisitionGeometry) -> np.ndarray:
    """Image-plane (cross-range, elevation) coordinates of every vertex, shape (n, 3, 2)."""
    _, c, g = los_frame(geom)
    return np.stack([mesh.triangles @ c, mesh.triangles @ g], axis=-1)


def facet_polygons(mesh: TargetMesh, geom: AcquisitionGeometry) -> list[Polygon]:
    proj = project(mesh, geom)
    return [Polygon(p) for p in proj]


def visible_set(mesh: TargetMesh, geom: AcquisitionGeometry, cfg: DetectionConfig = DetectionConfig(),
                index: AccelIndex | None = None) -> np.ndarray:
    """Per-facet visible projected area (m^2) on the plane normal to the LOS."""
    if mesh.is_empty:
        return np.zeros(0)
    if cfg.visibility == "exact-clipping":
        return _exact(mesh, geom)
    return _depth_buffer(mesh, geom, cfg.buffer_resolution, index)


def _depth_buffer(mesh, geom, resolution, index=None):
    index = index or build_index(mesh)
    u, c, g = los_frame(geom)
    lo, hi = mesh.bbox
    diag = float(np.linalg.norm(hi - lo))
    if diag == 0.0:
        return np.zeros(len(mesh))
    px = diag / resolution
    corners = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    pc, pg, pu = corners @ c, corners @ g, corners @ u
    nx = max(1, int(np.ceil((pc.max() - pc.min()) / px)))
    ny = max(1, int(np.ceil((pg.max() - pg.min()) / px)))
    cc = pc.min() + (np.arange(nx) + 0.5) * px
    gg = pg.min() + (np.arange(ny) + 0.5) * px
    C, G = np.meshgrid(cc, gg, indexing="ij")
    top = pu.max() + px
    area = np.zeros(len(mesh))
    step = 1 << 20
    C, G = C.ravel(), G.ravel()
    for s in range(0, C.size, step):
        o = top * u + C[s:s + step, None] * c + G[s:s + step, None] * g
        hit, _ = index.intersect(o, -u)
        hit = hit[hit >= 0]
        hit = hit[mesh.normals[hit] @ u > 0]
        area += np.bincount(hit, minlength=len(mesh)) * px * px
    return area


def _halfplane(poly_bounds, a, b, eps):
    """Polygon of ``{x : a.x + b > eps}`` restricted to the bounds rectangle."""
    x0, y0, x1, y1 = poly_bounds
    pts = [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]
    out = []
    for i in range(4):
        p, q = np.array(pts[i]), np.array(pts[(i + 1) % 4])
        fp, fq = a @ p + b - eps, a @ q + b - eps
        if fp > 0:
            out.append(tuple(p))
        if (fp > 0) != (fq > 0):
            t = fp / (fp - fq)
            out.append(tuple(p + t * (q - p)))
    return Polygon(out) if len(out) >= 3 else None


def _exact(mesh, geom):
    u, c, g = los_frame(geom)
    proj = project(mesh, geom)
    nu = mesh.normals @ u
    nc = mesh.normals @ c
    ng = mesh.normals @ g
    off = np.einsum("ij,ij->i", mesh.normals, mesh.triangles[:, 0])
    polys = [Polygon(p) for p in proj]
    valid = np.array([p.area > 0 for p in polys]) & (np.abs(nu) > 1e-12)
    tree = shapely.STRtree([polys[i] for i in np.flatnonzero(valid)])
    valid_ids = np.flatnonzero(valid)
    scale = 1e-9 * max(1.0, mesh.diagonal)
    # snap-rounded overlay: the floating overlay can silently skip a subtraction on near-collinear edges
    grid = 1e-12 * max(1.0, mesh.diagonal)
    area = np.zeros(len(mesh))
    for i in np.flatnonzero(valid & (nu > 0)):
        pi = polys[i]
        # depth along u of facet j over image point x: (off_j - nc_j x - ng_j y) / nu_j
        occ = []
        for jj in tree.query(pi):
            j = valid_ids[jj]
            if j == i:
                continue
            inter = pi.intersection(polys[j])
            if inter.area <= 0:
                continue
            a = np.array([-nc[j] / nu[j] + nc[i] / nu[i], -ng[j] / nu[j] + ng[i] / nu[i]])
            b = off[j] / nu[j] - off[i] / nu[i]
            if np.allclose(a, 0.0, atol=1e-12):
                if b > scale:
                    occ.append(inter)
                continue
            hp = _halfplane(shp_box(*pi.bounds).buffer(scale).bounds, a, b, scale)
            if hp is not None:
                part = inter.intersection(hp)
                if part.area > 0:
                    occ.append(part)
        if occ:
            snapped = _polygonal(shapely.set_precision(pi, grid))
            cover = _polygonal(shapely.union_all(occ, grid_size=grid))
            vis = snapped if snapped.is_empty or cover.is_empty else snapped.difference(cover, grid_size=grid)
        else:
            vis = pi
        area[i] = vis.area
    return area


def _polygonal(geom):
    """Area-bearing part of ``geom``; snapping can collapse slivers into lines, which carry no area."""
    if geom.geom_type in ("Polygon", "MultiPolygon"):
        return geom
    parts = [p for p in shapely.get_parts(geom) if p.geom_type in ("Polygon", "MultiPolygon")]
    return shapely.union_all(parts) if parts else Polygon()


def silhouette_area(mesh: TargetMesh, geom: AcquisitionGeometry) -> float:
    polys = [p for p in facet_polygons(mesh, geom) if p.area > 0]
    grid = 1e-12 * max(1.0, mesh.diagonal) if polys else 0.0
    return float(shapely.union_all(polys, grid_size=grid).area) if polys else 0.0
