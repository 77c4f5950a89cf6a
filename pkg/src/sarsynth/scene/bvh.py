"""Bounding-volume hierarchy over mesh facets, with a brute-force twin.

Both paths share one Moller-Trumbore routine and the same tie rule
(smallest distance, then smallest facet id), so their answers are
bit-identical. Back faces are reported, not culled; callers decide what a
back-face hit means.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .mesh import TargetMesh

LEAF_SIZE = 4
_STACK = 128


class EmptyMeshError(ValueError):
    pass


@njit(cache=True, inline="always")
def _tri_hit(o0, o1, o2, d0, d1, d2, tri, f):
    v00 = tri[f, 0, 0]
    v01 = tri[f, 0, 1]
    v02 = tri[f, 0, 2]
    e10 = tri[f, 1, 0] - v00
    e11 = tri[f, 1, 1] - v01
    e12 = tri[f, 1, 2] - v02
    e20 = tri[f, 2, 0] - v00
    e21 = tri[f, 2, 1] - v01
    e22 = tri[f, 2, 2] - v02
    p0 = d1 * e22 - d2 * e21
    p1 = d2 * e20 - d0 * e22
    p2 = d0 * e21 - d1 * e20
    det = e10 * p0 + e11 * p1 + e12 * p2
    if det == 0.0:
        return -1.0
    inv = 1.0 / det
    s0 = o0 - v00
    s1 = o1 - v01
    s2 = o2 - v02
    u = (s0 * p0 + s1 * p1 + s2 * p2) * inv
    if u < 0.0 or u > 1.0:
        return -1.0
    q0 = s1 * e12 - s2 * e11
    q1 = s2 * e10 - s0 * e12
    q2 = s0 * e11 - s1 * e10
    v = (d0 * q0 + d1 * q1 + d2 * q2) * inv
    if v < 0.0 or u + v > 1.0:
        return -1.0
    return (e20 * q0 + e21 * q1 + e22 * q2) * inv


@njit(cache=True)
def _brute(orig, dirs, tri, ignore, tmin):
    n = orig.shape[0]
    hit = np.full(n, -1, np.int64)
    dist = np.full(n, np.inf)
    for r in range(n):
        o0, o1, o2 = orig[r, 0], orig[r, 1], orig[r, 2]
        d0, d1, d2 = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        best = np.inf
        bid = -1
        for f in range(tri.shape[0]):
            if f == ignore[r]:
                continue
            t = _tri_hit(o0, o1, o2, d0, d1, d2, tri, f)
            if t > tmin and (t < best or (t == best and f < bid)):
                best = t
                bid = f
        hit[r] = bid
        dist[r] = best
    return hit, dist


@njit(cache=True)
def _traverse(orig, dirs, tri, ignore, tmin, bmin, bmax, left, right, start, count, order):
    n = orig.shape[0]
    hit = np.full(n, -1, np.int64)
    dist = np.full(n, np.inf)
    visits = np.zeros(n, np.int64)
    stack = np.empty(_STACK, np.int64)
    for r in range(n):
        o0, o1, o2 = orig[r, 0], orig[r, 1], orig[r, 2]
        d0, d1, d2 = dirs[r, 0], dirs[r, 1], dirs[r, 2]
        i0 = 1.0 / d0 if d0 != 0.0 else np.inf
        i1 = 1.0 / d1 if d1 != 0.0 else np.inf
        i2 = 1.0 / d2 if d2 != 0.0 else np.inf
        best = np.inf
        bid = -1
        sp = 0
        stack[sp] = 0
        sp += 1
        nv = 0
        while sp > 0:
            sp -= 1
            node = stack[sp]
            nv += 1
            # slab test; axis-parallel rays are handled without 0*inf
            lo = -np.inf
            hi = np.inf
            miss = False
            for ax in range(3):
                if ax == 0:
                    o, iv, dd = o0, i0, d0
                elif ax == 1:
                    o, iv, dd = o1, i1, d1
                else:
                    o, iv, dd = o2, i2, d2
                if dd == 0.0:
                    if o < bmin[node, ax] or o > bmax[node, ax]:
                        miss = True
                        break
                    continue
                ta = (bmin[node, ax] - o) * iv
                tb = (bmax[node, ax] - o) * iv
                if ta > tb:
                    ta, tb = tb, ta
                if ta > lo:
                    lo = ta
                if tb < hi:
                    hi = tb
            if miss or lo > hi or hi < tmin or lo > best:
                continue
            if left[node] < 0:
                for k in range(start[node], start[node] + count[node]):
                    f = order[k]
                    if f == ignore[r]:
                        continue
                    t = _tri_hit(o0, o1, o2, d0, d1, d2, tri, f)
                    if t > tmin and (t < best or (t == best and f < bid)):
                        best = t
                        bid = f
            else:
                stack[sp] = right[node]
                sp += 1
                stack[sp] = left[node]
                sp += 1
        hit[r] = bid
        dist[r] = best
        visits[r] = nv
    return hit, dist, visits


class AccelIndex:
    """Median-split BVH over the facets of a :class:`TargetMesh`.

    Queries return, per ray, the nearest facet id (``-1`` on a miss) and the
    distance along the ray (``inf`` on a miss).
    """

    def __init__(self, mesh: TargetMesh, leaf_size: int = LEAF_SIZE):
        if mesh.is_empty:
            raise EmptyMeshError("cannot index an empty mesh")
        self.mesh = mesh
        tri = mesh.triangles
        lo_f = tri.min(axis=1)
        hi_f = tri.max(axis=1)
        cen = (lo_f + hi_f) / 2.0
        order = np.arange(len(mesh), dtype=np.int64)
        bmin, bmax, left, right, start, count = [], [], [], [], [], []

        def new_node(idx_lo, idx_hi):
            sel = order[idx_lo:idx_hi]
            bmin.append(lo_f[sel].min(axis=0))
            bmax.append(hi_f[sel].max(axis=0))
            left.append(-1)
            right.append(-1)
            start.append(idx_lo)
            count.append(idx_hi - idx_lo)
            return len(bmin) - 1

        root = new_node(0, len(mesh))
        todo = [root]
        while todo:
            node = todo.pop()
            s, c = start[node], count[node]
            if c <= leaf_size:
                continue
            sel = order[s:s + c]
            ext = cen[sel].max(axis=0) - cen[sel].min(axis=0)
            ax = int(np.argmax(ext))
            if ext[ax] <= 0.0:
                continue
            srt = np.argsort(cen[sel, ax], kind="stable")
            order[s:s + c] = sel[srt]
            mid = s + c // 2
            ln = new_node(s, mid)
            rn = new_node(mid, s + c)
            left[node], right[node] = ln, rn
            count[node] = 0
            todo.extend([ln, rn])

        # inflate boxes slightly so rounding in the slab test never rejects
        # a ray that the triangle test would accept
        bmin = np.asarray(bmin)
        bmax = np.asarray(bmax)
        pad = 1e-9 * max(1.0, float(np.abs(tri).max()))
        self._bmin = bmin - pad
        self._bmax = bmax + pad
        self._left = np.asarray(left, np.int64)
        self._right = np.asarray(right, np.int64)
        self._start = np.asarray(start, np.int64)
        self._count = np.asarray(count, np.int64)
        self._order = order
        self._tri = np.ascontiguousarray(tri)
        self.node_count = len(self._left)

    @property
    def bbox(self) -> tuple[np.ndarray, np.ndarray]:
        return self.mesh.bbox

    def intersect(self, origins, directions, ignore=None, tmin: float = 1e-9, return_visits: bool = False):
        o, d, ign = _prep(origins, directions, ignore)
        hit, dist, visits = _traverse(
            o, d, self._tri, ign, tmin, self._bmin, self._bmax,
            self._left, self._right, self._start, self._count, self._order,
        )
        if return_visits:
            return hit, dist, visits
        return hit, dist


def build_index(mesh: TargetMesh) -> AccelIndex:
    return AccelIndex(mesh)


def brute_force_intersect(mesh: TargetMesh, origins, directions, ignore=None, tmin: float = 1e-9):
    """Reference nearest-hit search over every facet."""
    o, d, ign = _prep(origins, directions, ignore)
    return _brute(o, d, np.ascontiguousarray(mesh.triangles), ign, tmin)


def _prep(origins, directions, ignore):
    o = np.ascontiguousarray(np.atleast_2d(origins), dtype=np.float64)
    d = np.ascontiguousarray(np.atleast_2d(directions), dtype=np.float64)
    if d.shape[0] == 1 and o.shape[0] > 1:
        d = np.ascontiguousarray(np.broadcast_to(d, o.shape))
    if ignore is None:
        ign = np.full(o.shape[0], -1, np.int64)
    else:
        ign = np.ascontiguousarray(np.broadcast_to(np.asarray(ignore, np.int64), (o.shape[0],)))
    return o, d, ign
