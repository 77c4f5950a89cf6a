"""Canonical-effect detection and the non-coherent backscatter fill.

Facets are first grouped into coplanar clusters (connected through shared
edges). Plates are single clusters facing the sensor; dihedrals are pairs
of orthogonal concave clusters whose fold is normal to the line of sight;
trihedrals are mutually orthogonal concave triples meeting at a corner.

Effective areas of the multi-bounce effects come from the image-plane
overlap of a face with the mirror image of its partner(s), which is the
aperture that actually returns energy to the sensor. At the symmetric
geometry they reduce to the textbook forms ``8 pi a^2 b^2 / lambda^2``
and ``12 pi a^4 / lambda^2``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import shapely
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from shapely import affinity
from shapely.geometry import Polygon

from ..scene.bvh import AccelIndex
from ..scene.geometry import AcquisitionGeometry, los_frame
from ..scene.materials import Material, MaterialTable
from ..scene.mesh import TargetMesh
from .model import DetectionConfig, M3dModel, Scatterer
from .visibility import project, visible_set

_WELD = 1e-7
_COPLANAR_COS = np.cos(np.deg2rad(0.05))
# depth-buffer pixel counting under-reports by up to ~1%; treat as unoccluded
_VISIBLE_SNAP = 0.98


@dataclass
class Cluster:
    facets: np.ndarray
    normal: np.ndarray
    offset: float
    visible: float
    projected: float
    polygon: object  # shapely geometry in image coordinates
    centroid: np.ndarray

    @property
    def visible_fraction(self) -> float:
        if self.projected <= 0:
            return 0.0
        f = self.visible / self.projected
        return 1.0 if f >= _VISIBLE_SNAP else f


def coplanar_clusters(mesh: TargetMesh, facets=None) -> list[np.ndarray]:
    """Connected coplanar groups among ``facets`` (default: all), sorted by first facet id."""
    ids = np.arange(len(mesh)) if facets is None else np.asarray(facets, dtype=np.int64)
    if ids.size == 0:
        return []
    tri = mesh.triangles[ids]
    key = np.round(tri.reshape(-1, 3) / _WELD).astype(np.int64)
    _, vid = np.unique(key, axis=0, return_inverse=True)
    vid = vid.reshape(-1, 3)
    edges = np.concatenate([vid[:, [0, 1]], vid[:, [1, 2]], vid[:, [2, 0]]])
    edges.sort(axis=1)
    owner = np.tile(np.arange(ids.size), 3)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    e, o = edges[order], owner[order]
    same = np.all(e[1:] == e[:-1], axis=1)
    a, b = o[:-1][same], o[1:][same]
    n = mesh.normals[ids]
    ok = np.einsum("ij,ij->i", n[a], n[b]) >= _COPLANAR_COS
    scale = 1e-6 * max(1.0, mesh.diagonal)
    ok &= np.abs(np.einsum("ij,ij->i", n[a], mesh.centroids[ids][b] - tri[a, 0])) <= scale
    a, b = a[ok], b[ok]
    graph = coo_matrix((np.ones(a.size), (a, b)), shape=(ids.size, ids.size))
    _, label = connected_components(graph, directed=False)
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(label):
        groups.setdefault(lab, []).append(ids[i])
    return sorted((np.asarray(g) for g in groups.values()), key=lambda g: g[0])


def _clusters(mesh, geom, vis, min_area=0.0):
    u, _, _ = los_frame(geom)
    front = np.flatnonzero((mesh.normals @ u > 0) & (vis > 0))
    proj = project(mesh, geom)
    cen = mesh.centroids
    out = []
    for f in coplanar_clusters(mesh, front):
        w = mesh.areas[f]
        nrm = (mesh.normals[f] * w[:, None]).sum(0)
        nrm /= np.linalg.norm(nrm)
        polys = [Polygon(p) for p in proj[f]]
        poly = shapely.union_all([p for p in polys if p.area > 0])
        ctr = (cen[f] * w[:, None]).sum(0) / w.sum()
        c = Cluster(f, nrm, float(nrm @ ctr), float(vis[f].sum()), float(poly.area), poly, ctr)
        if c.visible > min_area:
            out.append(c)
    return out


def _vertices(mesh, f):
    return mesh.triangles[f].reshape(-1, 3)


def _extent_along(mesh, f, axis):
    s = _vertices(mesh, f) @ axis
    return float(s.max() - s.min())


def _in_plane_axes(normal, u):
    h = np.cross([0.0, 0.0, 1.0], normal)
    if np.linalg.norm(h) < 1e-9:
        h = np.cross(normal, np.cross(u, normal))
        if np.linalg.norm(h) < 1e-9:
            h = np.array([0.0, 1.0, 0.0])
    h /= np.linalg.norm(h)
    return h, np.cross(normal, h)


# --------------------------------------------------------------------------
# plates

def detect_plates(mesh: TargetMesh, geom: AcquisitionGeometry, cfg: DetectionConfig = DetectionConfig(),
                  visible=None, index: AccelIndex | None = None) -> list[Scatterer]:
    """One plate per visible coplanar cluster facing the sensor within the specular tolerance."""
    if mesh.is_empty:
        return []
    vis = visible_set(mesh, geom, cfg, index) if visible is None else visible
    u, _, _ = los_frame(geom)
    cos_tol = np.cos(np.deg2rad(cfg.specular_tolerance))
    lam = geom.wavelength
    out = []
    for cl in _clusters(mesh, geom, vis, cfg.min_effective_area):
        if cl.normal @ u <= cos_tol:
            continue
        f = cl.facets
        area = cl.visible
        pos = (mesh.centroids[f] * vis[f, None]).sum(0) / vis[f].sum()
        h, v = _in_plane_axes(cl.normal, u)
        ext = (_extent_along(mesh, f, h), _extent_along(mesh, f, v))
        amp = -np.sqrt(4 * np.pi) * area / lam
        out.append(Scatterer("plate", pos, amp, ext, "sinc2d", h, v))
    return out


# --------------------------------------------------------------------------
# dihedrals and trihedrals

def _orthogonal_pairs(clusters, cfg):
    """Index pairs (i < j) of orthogonal clusters that open toward each other."""
    if len(clusters) < 2:
        return []
    n = np.array([c.normal for c in clusters])
    x = np.array([c.centroid for c in clusters])
    sin_tol = np.sin(np.deg2rad(cfg.orthogonality_tolerance))
    i, j = np.nonzero(np.triu(np.abs(n @ n.T) <= sin_tol, 1))
    d = x[j] - x[i]
    concave = (np.einsum("ij,ij->i", n[i], d) > 0) & (np.einsum("ij,ij->i", n[j], -d) > 0)
    return list(zip(i[concave].tolist(), j[concave].tolist()))


def _fold(na, nb, da, db):
    f = np.cross(na, nb)
    f /= np.linalg.norm(f)
    A = np.array([na, nb])
    q = np.linalg.lstsq(A, np.array([da, db]), rcond=None)[0]
    return f, q


def _line_distance(points, q, f):
    r = points - q
    return np.linalg.norm(r - np.outer(r @ f, f), axis=1)


def _mirror(geom2d, p, d):
    """Reflect a shapely geometry across the line through ``p`` with unit direction ``d``."""
    dx, dy = d
    a, b = dx * dx - dy * dy, 2 * dx * dy
    # reflection about a line through the origin: [[a, b], [b, -a]]
    x0, y0 = p
    xo = x0 - (a * x0 + b * y0)
    yo = y0 - (b * x0 - a * y0)
    return affinity.affine_transform(geom2d, [a, b, b, -a, xo, yo])


def detect_dihedrals(mesh: TargetMesh, geom: AcquisitionGeometry, cfg: DetectionConfig = DetectionConfig(),
                     visible=None, index: AccelIndex | None = None) -> list[Scatterer]:
    """Double-bounce corners whose fold is normal to the line of sight."""
    if mesh.is_empty:
        return []
    vis = visible_set(mesh, geom, cfg, index) if visible is None else visible
    u, c, g = los_frame(geom)
    lam = geom.wavelength
    sin_spec = np.sin(np.deg2rad(cfg.specular_tolerance))
    clusters = _clusters(mesh, geom, vis)
    out = []
    for ia, ib in _orthogonal_pairs(clusters, cfg):
        A, B = clusters[ia], clusters[ib]
        f, q = _fold(A.normal, B.normal, A.offset, B.offset)
        if abs(f @ u) >= sin_spec:
            continue
        va, vb = _vertices(mesh, A.facets), _vertices(mesh, B.facets)
        wa, wb = np.ptp(va @ np.cross(A.normal, f)), np.ptp(vb @ np.cross(B.normal, f))
        tol = 0.05 * max(wa, wb) + 1e-6
        if _line_distance(va, q, f).min() > tol or _line_distance(vb, q, f).min() > tol:
            continue
        f2 = np.array([f @ c, f @ g])
        f2 /= np.linalg.norm(f2)
        q2 = np.array([q @ c, q @ g])
        lit_a = A.polygon.intersection(_mirror(B.polygon, q2, f2))
        lit_b = B.polygon.intersection(_mirror(A.polygon, q2, f2))
        a_eff = (lit_a.area + lit_b.area) * min(A.visible_fraction, B.visible_fraction)
        if a_eff < cfg.min_effective_area:
            continue
        overlap = shapely.union_all([lit_a, lit_b])
        x = np.array(overlap.centroid.coords[0])
        f2raw = np.array([f @ c, f @ g])
        pos = q + ((x - q2) @ f2raw / (f2raw @ f2raw)) * f
        s = shapely.get_coordinates(overlap) @ f2
        ext = (float(np.ptp(s)), float(min(wa, wb)))
        amp = np.sqrt(4 * np.pi) * a_eff / lam
        out.append(Scatterer("dihedral", pos, amp, ext, "sinc2d", f, np.zeros(3)))
    return out


def detect_trihedrals(mesh: TargetMesh, geom: AcquisitionGeometry, cfg: DetectionConfig = DetectionConfig(),
                      visible=None, index: AccelIndex | None = None) -> list[Scatterer]:
    """Triple-bounce corners: three mutually orthogonal concave faces around one apex."""
    if mesh.is_empty:
        return []
    vis = visible_set(mesh, geom, cfg, index) if visible is None else visible
    u, c, g = los_frame(geom)
    lam = geom.wavelength
    clusters = _clusters(mesh, geom, vis)
    pairs = _orthogonal_pairs(clusters, cfg)
    adj: dict[int, set[int]] = {}
    for a, b in pairs:
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)
    out = []
    for a, b in pairs:
        for k in sorted(adj[a] & adj[b]):
            if k <= b:
                continue
            tri = [clusters[i] for i in (a, b, k)]
            N = np.array([t.normal for t in tri])
            apex = np.linalg.solve(N, np.array([t.offset for t in tri]))
            near = True
            for t in tri:
                v = _vertices(mesh, t.facets)
                if np.linalg.norm(v - apex, axis=1).min() > 0.1 * np.ptp(v, axis=0).max() + 1e-6:
                    near = False
            if not near:
                continue
            U = shapely.union_all([t.polygon for t in tri])
            p2 = np.array([apex @ c, apex @ g])
            R = affinity.affine_transform(U, [-1, 0, 0, -1, 2 * p2[0], 2 * p2[1]])
            a_eff = U.intersection(R).area * min(t.visible_fraction for t in tri)
            if a_eff < cfg.min_effective_area:
                continue
            side = float(np.sqrt(a_eff / np.sqrt(3.0)))
            amp = -np.sqrt(4 * np.pi) * a_eff / lam
            out.append(Scatterer("trihedral", apex, amp, (side, side), "cospow", u, np.zeros(3),
                                 pattern_param=cfg.trihedral_power))
    return out


# --------------------------------------------------------------------------
# diffuse fill

def _material_list(mesh: TargetMesh, materials) -> tuple[Material, ...]:
    if materials is None:
        return mesh.materials
    if isinstance(materials, MaterialTable):
        materials = materials.materials
    return tuple(materials.get(m.name, m) for m in mesh.materials)


def _subdivide(tri, levels):
    for _ in range(levels):
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
        ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
        tri = np.concatenate([np.stack(t, 1) for t in ((a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca))])
    return tri


def backscatter_fill(mesh: TargetMesh, geom: AcquisitionGeometry, materials=None,
                     cfg: DetectionConfig = DetectionConfig(), seed: int = 0, visible=None,
                     index: AccelIndex | None = None) -> list[Scatterer]:
    """Non-coherent scatterers covering every visible surface.

    Facets larger than one fill cell are split so that no point stands for
    more than roughly ``cfg.fill_cell`` of surface; points of the same
    coplanar cluster falling in the same cell are merged (powers add,
    position is power weighted). Each merged scatterer gets a uniform
    random phase from ``seed``.
    """
    if mesh.is_empty:
        return []
    vis = visible_set(mesh, geom, cfg, index) if visible is None else visible
    u, _, _ = los_frame(geom)
    mats = _material_list(mesh, materials)
    sigma0 = np.array([m.sigma0 for m in mats])[mesh.material_ids]
    cos_i = np.clip(mesh.normals @ u, 0.0, 1.0)
    power = sigma0 * cos_i ** cfg.incidence_exponent * vis
    label = np.full(len(mesh), -1)
    live = np.flatnonzero(power > 0)
    groups = coplanar_clusters(mesh, live)
    # cells are anchored at each cluster's own corner so a small plate is not cut by the world grid
    origin = np.array([mesh.triangles[f].reshape(-1, 3).min(0) for f in groups]).reshape(-1, 3)
    for ci, f in enumerate(groups):
        label[f] = ci
    cell = cfg.fill_cell
    pts, pw, lab = [], [], []
    for fid in live:
        area = mesh.areas[fid]
        levels = int(np.ceil(np.log(area / cell ** 2) / np.log(4))) if area > cell ** 2 else 0
        sub = _subdivide(mesh.triangles[fid:fid + 1], levels)
        pts.append(sub.mean(axis=1))
        pw.append(np.full(len(sub), power[fid] / len(sub)))
        lab.append(np.full(len(sub), label[fid]))
    if not pts:
        return []
    pts, pw, lab = np.concatenate(pts), np.concatenate(pw), np.concatenate(lab)
    keys = np.column_stack([lab, np.floor((pts - origin[lab]) / cell).astype(np.int64)])
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.ravel()
    tot = np.bincount(inv, weights=pw)
    pos = np.column_stack([np.bincount(inv, weights=pw * pts[:, k]) for k in range(3)]) / tot[:, None]
    phase = np.random.default_rng(seed).uniform(0.0, 2 * np.pi, len(uniq))
    return [Scatterer("diffuse", pos[i], np.sqrt(tot[i]) * np.exp(1j * phase[i]), coherent=False)
            for i in range(len(uniq))]


# --------------------------------------------------------------------------
# assembly

def assemble_m3d(mesh: TargetMesh, geom: AcquisitionGeometry, materials=None,
                 cfg: DetectionConfig = DetectionConfig(), seed: int = 0,
                 index: AccelIndex | None = None) -> M3dModel:
    """Plates, dihedrals, trihedrals and the diffuse fill for one geometry."""
    if mesh.is_empty:
        return M3dModel([], geom, cfg, seed)
    vis = visible_set(mesh, geom, cfg, index)
    scat = (detect_plates(mesh, geom, cfg, vis) + detect_dihedrals(mesh, geom, cfg, vis)
            + detect_trihedrals(mesh, geom, cfg, vis) + backscatter_fill(mesh, geom, materials, cfg, seed, vis))
    return M3dModel(scat, geom, cfg, seed)
