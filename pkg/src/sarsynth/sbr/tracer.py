"""Shooting-and-bouncing-rays tracer, monostatic.

Rays leave a uniform grid on a plane normal to the line of sight, bounce
specularly (geometrical optics) across single-sided facets, and when a ray
leaves the scene its last facet radiates back toward the sensor through a
flat-facet physical-optics kernel integrated over the ray-tube footprint.

Polarization is carried as two complex field vectors per ray (H and V
transmit). At each bounce the field is split in the local (s, p) basis
with ``s = d x n`` and ``p = s x d``; a perfect conductor reflects with
``diag(-1, +1)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..scene.bvh import AccelIndex
from ..scene.geometry import CHANNELS, AcquisitionGeometry, los_frame
from ..scene.materials import fresnel_coefficients
from .contributions import Contributions, concatenate, rcs_estimate

log = logging.getLogger(__name__)


class RayBudgetError(RuntimeError):
    """Launch grid larger than the configured ray limit."""


@dataclass(frozen=True)
class SbrConfig:
    max_bounces: int = 5
    ray_area: float = 1e-6
    amplitude_cutoff: float = 1e-4
    aperture_margin: float = 0.05
    max_rays: int = 50_000_000
    chunk_size: int = 262_144
    return_occlusion: bool = True

    def __post_init__(self):
        if int(self.max_bounces) < 1:
            raise ValueError("max_bounces must be >= 1")
        if not self.ray_area > 0:
            raise ValueError("ray_area must be positive")
        if not 0.0 <= self.amplitude_cutoff < 1.0:
            raise ValueError("amplitude_cutoff must lie in [0, 1)")
        if self.aperture_margin < 0:
            raise ValueError("aperture_margin must be non-negative")

    @property
    def spacing(self) -> float:
        return float(np.sqrt(self.ray_area))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass
class RayBundle:
    origins: np.ndarray
    direction: np.ndarray
    tube_area: float
    spacing: float
    launch_distance: float
    cross: np.ndarray
    elevation: np.ndarray
    shape: tuple[int, int]

    def __len__(self) -> int:
        return self.origins.shape[0]


def _window(bbox, u, c, g, margin):
    lo, hi = bbox
    corners = np.array([[x, y, z] for x in (lo[0], hi[0]) for y in (lo[1], hi[1]) for z in (lo[2], hi[2])])
    pc, pg, pu = corners @ c, corners @ g, corners @ u
    return (pc.min() - margin, pc.max() + margin), (pg.min() - margin, pg.max() + margin), pu.max() + margin


def launch_grid(index: AccelIndex, geom: AcquisitionGeometry, cfg: SbrConfig, window=None) -> RayBundle:
    """Uniform ray grid covering the projected bounding box plus margin.

    ``window`` optionally replaces the index bounding box, e.g. to launch
    only over the target when a large ground patch is in the scene.
    """
    u, c, g = los_frame(geom)
    bbox = index.bbox if window is None else window
    diag = float(np.linalg.norm(np.asarray(bbox[1]) - np.asarray(bbox[0])))
    margin = cfg.aperture_margin * diag
    (c0, c1), (g0, g1), top = _window(bbox, u, c, g, margin)
    h = cfg.spacing
    nx = int(np.ceil((c1 - c0) / h - 1e-9)) if c1 > c0 else 1
    ny = int(np.ceil((g1 - g0) / h - 1e-9)) if g1 > g0 else 1
    nx, ny = max(nx, 1), max(ny, 1)
    if nx * ny > cfg.max_rays:
        raise RayBudgetError(f"{nx * ny} rays exceed the limit of {cfg.max_rays}")
    cc = (c0 + c1) / 2 + (np.arange(nx) - (nx - 1) / 2) * h
    gg = (g0 + g1) / 2 + (np.arange(ny) - (ny - 1) / 2) * h
    C, G = np.meshgrid(cc, gg, indexing="ij")
    C, G = C.ravel(), G.ravel()
    distance = top + h
    origins = distance * u + C[:, None] * c + G[:, None] * g
    return RayBundle(origins, -u, h * h, h, distance, C, G, (nx, ny))


def _reflect(field, d, n, d_out, gs, gp):
    """Reflect complex field vectors ``field`` (m, 3) at normals ``n``."""
    s = np.cross(d, n)
    ns = np.linalg.norm(s, axis=1)
    small = ns < 1e-12
    if np.any(small):
        # normal incidence: any transverse axis serves as s
        ref = np.where(np.abs(d[small, 2:3]) < 0.9, [[0.0, 0.0, 1.0]], [[1.0, 0.0, 0.0]])
        alt = np.cross(d[small], ref)
        s[small] = alt
        ns[small] = np.linalg.norm(alt, axis=1)
    s /= ns[:, None]
    p_in = np.cross(s, d)
    p_out = np.cross(s, d_out)
    es = np.einsum("ij,ij->i", field, s)
    ep = np.einsum("ij,ij->i", field, p_in)
    return (gs * es)[:, None] * s + (gp * ep)[:, None] * p_out


def _material_coeffs(mesh, facets, cos_i):
    gs = np.empty(len(facets), complex)
    gp = np.empty(len(facets), complex)
    mids = mesh.material_ids[facets]
    for mid in np.unique(mids):
        sel = mids == mid
        gs[sel], gp[sel] = fresnel_coefficients(mesh.materials[mid], cos_i[sel])
    return gs, gp


def _trace_chunk(index, geom, cfg, bundle, sl):
    mesh = index.mesh
    u, c, g = los_frame(geom)
    k = geom.wavenumber
    lam = geom.wavelength
    N = int(cfg.max_bounces)
    m = sl.stop - sl.start
    pos = bundle.origins[sl].copy()
    d = np.broadcast_to(bundle.direction, (m, 3)).copy()
    e_h = np.broadcast_to(c.astype(complex), (m, 3)).copy()
    e_v = np.broadcast_to(g.astype(complex), (m, 3)).copy()
    t1 = np.broadcast_to(c * bundle.spacing, (m, 3)).copy()
    t2 = np.broadcast_to(g * bundle.spacing, (m, 3)).copy()
    length = np.zeros(m)
    cross0 = bundle.cross[sl].copy()
    rid = np.arange(sl.start, sl.stop)
    chain = np.full((m, N), -1, np.int32)
    ignore = np.full(m, -1, np.int64)
    rx = np.stack([c, g])  # receive polarization vectors, H then V

    facet, dist = index.intersect(pos, d, ignore)
    out = []
    bounce = 0
    while m:
        bounce += 1
        hit = facet >= 0
        normals = mesh.normals[np.maximum(facet, 0)]
        front = hit & (np.einsum("ij,ij->i", normals, d) < 0)
        keep = np.flatnonzero(front)
        if keep.size == 0:
            break
        pos, d, e_h, e_v, t1, t2 = (a[keep] for a in (pos, d, e_h, e_v, t1, t2))
        length, cross0, chain, facet, dist, rid = (a[keep] for a in (length, cross0, chain, facet, dist, rid))
        n = mesh.normals[facet]
        pos = pos + dist[:, None] * d
        length = length + dist
        chain[:, bounce - 1] = facet

        cos_i = -np.einsum("ij,ij->i", n, d)
        gs, gp = _material_coeffs(mesh, facet, cos_i)
        d_out = d - 2.0 * (-cos_i)[:, None] * n
        r_h = _reflect(e_h, d, n, d_out, gs, gp)
        r_v = _reflect(e_v, d, n, d_out, gs, gp)
        strength = np.maximum(np.linalg.norm(r_h, axis=1), np.linalg.norm(r_v, axis=1))

        nxt, ndist = index.intersect(pos, d_out, facet)
        exits = (nxt < 0) & (strength >= cfg.amplitude_cutoff)
        if np.any(exits):
            sel = np.flatnonzero(exits)
            part = _emit(index, geom, cfg, u, rx, k, lam, bundle, sel, pos, d, n, facet,
                         r_h, r_v, t1, t2, length, cross0, chain, bounce)
            if part is not None:
                out.append((rid[part[0]], part[1]))
        # continue only through further front-face hits within the bounce budget
        cont = (nxt >= 0) & (strength >= cfg.amplitude_cutoff) & (bounce < N)
        sel = np.flatnonzero(cont)
        m = sel.size
        if not m:
            break
        t1 = t1 - 2.0 * np.einsum("ij,ij->i", n, t1)[:, None] * n
        t2 = t2 - 2.0 * np.einsum("ij,ij->i", n, t2)[:, None] * n
        pos, d, e_h, e_v, t1, t2 = pos[sel], d_out[sel], r_h[sel], r_v[sel], t1[sel], t2[sel]
        length, cross0, chain, rid = length[sel], cross0[sel], chain[sel], rid[sel]
        facet, dist = nxt[sel], ndist[sel]
    return out


def _emit(index, geom, cfg, u, rx, k, lam, bundle, sel, pos, d, n, facet, r_h, r_v, t1, t2, length, cross0, chain, bounce):
    p, dd, nn = pos[sel], d[sel], n[sel]
    if cfg.return_occlusion:
        blk, _ = index.intersect(p, u[None, :], facet[sel])
        ok = blk < 0
        sel = sel[ok]
        p, dd, nn = p[ok], dd[ok], nn[ok]
    if sel.size == 0:
        return None
    ndd = np.einsum("ij,ij->i", nn, dd)
    obliq = np.einsum("ij,ij->i", nn, u[None, :] - dd) / (2.0 * np.abs(ndd))
    # sub-tube phase variation across the footprint on the final facet
    q = k * (u[None, :] - dd)
    f1 = t1[sel] - dd * (np.einsum("ij,ij->i", nn, t1[sel]) / ndd)[:, None]
    f2 = t2[sel] - dd * (np.einsum("ij,ij->i", nn, t2[sel]) / ndd)[:, None]
    aperture = np.sinc(np.einsum("ij,ij->i", q, f1) / (2 * np.pi)) * np.sinc(np.einsum("ij,ij->i", q, f2) / (2 * np.pi))
    ret = bundle.launch_distance - p @ u
    total = length[sel] + ret
    scale = (2.0 * np.sqrt(np.pi) / lam) * bundle.tube_area * obliq * aperture * np.exp(-1j * k * total)
    amp = np.empty((sel.size, len(CHANNELS)), complex)
    for ti, field in enumerate((r_h[sel], r_v[sel])):
        for ri in range(2):
            amp[:, 2 * ti + ri] = scale * (field @ rx[ri])
    return sel, Contributions(
        amp, total, total / 2.0 - bundle.launch_distance, cross0[sel],
        np.full(sel.size, bounce, np.int32), chain[sel].copy(),
    )


def trace_paths(index: AccelIndex, geom: AcquisitionGeometry, cfg: SbrConfig = SbrConfig(), window=None) -> Contributions:
    """Trace the launch grid and return every emitted contribution.

    Materials come from the indexed mesh. Contributions are listed in launch
    order of their rays, so ``cfg.chunk_size`` changes neither the list nor
    its order (values can differ in the last bit between chunk sizes).
    """
    bundle = launch_grid(index, geom, cfg, window)
    rays, parts = [], []
    for start in range(0, len(bundle), cfg.chunk_size):
        sl = slice(start, min(start + cfg.chunk_size, len(bundle)))
        for r, p in _trace_chunk(index, geom, cfg, bundle, sl):
            rays.append(r)
            parts.append(p)
    out = concatenate(parts, cfg.max_bounces, geom, bundle.launch_distance)
    if parts:
        # a ray emits at most once: launch order fixes the list independent of chunking
        out = out.take(np.argsort(np.concatenate(rays), kind="stable"))
        out.geometry, out.launch_distance = geom, bundle.launch_distance
    out.meta = {"rays": len(bundle), "grid": list(bundle.shape), "config": cfg.to_dict()}
    return out


def sweep_rcs(index: AccelIndex, geom: AcquisitionGeometry, azimuths, cfg: SbrConfig = SbrConfig(), channel=None) -> np.ndarray:
    """RCS (m^2) at each azimuth; other geometry fields come from ``geom``."""
    az = np.asarray(azimuths, dtype=float)
    out = np.empty(az.size)
    for i, a in enumerate(az):
        g = geom.with_azimuth(a)
        out[i] = rcs_estimate(trace_paths(index, g, cfg), g.channel if channel is None else channel)
    return out
