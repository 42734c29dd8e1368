"""Axis-aligned bounding volume hierarchy over mesh triangles.

The tree is built by sorting triangle centroids along a Morton curve and
halving the sorted range until leaves hold at most ``leaf_size`` triangles.
Construction is vectorised level by level, queries go through
:mod:`sphereforge.kernels`.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import NotWatertight


def _morton(points, bits=10):
    lo = points.min(axis=0)
    span = np.maximum(points.max(axis=0) - lo, 1e-300)
    q = np.clip(((points - lo) / span * ((1 << bits) - 1)).astype(np.uint64), 0, (1 << bits) - 1)
    code = np.zeros(len(points), dtype=np.uint64)
    for b in range(bits):
        for axis in range(3):
            code |= ((q[:, axis] >> np.uint64(b)) & np.uint64(1)) << np.uint64(3 * b + (2 - axis))
    return code


class MeshBvh:
    """Immutable bounding-box tree over a mesh's faces.

    Parameters
    ----------
    mesh : TriangleMesh
    leaf_size : int
        Maximum triangles per leaf.
    """

    def __init__(self, mesh, leaf_size=4):
        if not len(mesh.faces):
            raise ValueError("cannot build a BVH over an empty mesh")
        self.mesh = mesh
        tri = mesh.triangles
        order = np.argsort(_morton(tri.mean(axis=1)), kind="stable")
        self.face_index = order
        self.tris = np.ascontiguousarray(tri[order])
        tlo = self.tris.min(axis=1)
        thi = self.tris.max(axis=1)

        starts, ends = [np.array([0])], [np.array([len(order)])]
        s, e = starts[0], ends[0]
        level_offset = 1
        left_parts, right_parts = [], []
        while True:
            split = (e - s) > leaf_size
            n_split = int(split.sum())
            lchild = np.full(len(s), -1)
            rchild = np.full(len(s), -1)
            if n_split == 0:
                left_parts.append(lchild)
                right_parts.append(rchild)
                break
            ids = level_offset + 2 * np.arange(n_split)
            lchild[split] = ids
            rchild[split] = ids + 1
            left_parts.append(lchild)
            right_parts.append(rchild)
            ss, ee = s[split], e[split]
            mid = (ss + ee) // 2
            s = np.stack([ss, mid], axis=1).reshape(-1)
            e = np.stack([mid, ee], axis=1).reshape(-1)
            starts.append(s)
            ends.append(e)
            level_offset += len(s)
        start = np.concatenate(starts)
        end = np.concatenate(ends)
        left = np.concatenate(left_parts)
        right = np.concatenate(right_parts)
        leaf = left < 0
        count = np.where(leaf, end - start, 0)

        n = len(start)
        lo = np.empty((n, 3))
        hi = np.empty((n, 3))
        leaf_ids = np.nonzero(leaf)[0]
        # leaves cover disjoint sorted ranges, so reduceat over their starts works
        lorder = leaf_ids[np.argsort(start[leaf_ids])]
        lo[lorder] = np.minimum.reduceat(tlo, start[lorder], axis=0)
        hi[lorder] = np.maximum.reduceat(thi, start[lorder], axis=0)
        # children live on the next level, so fill parents bottom-up
        bounds = np.cumsum([0] + [len(x) for x in starts])
        for lv in range(len(starts) - 1, -1, -1):
            ids = np.arange(bounds[lv], bounds[lv + 1])
            ids = ids[~leaf[ids]]
            if len(ids):
                lo[ids] = np.minimum(lo[left[ids]], lo[right[ids]])
                hi[ids] = np.maximum(hi[left[ids]], hi[right[ids]])
        self.lo = np.ascontiguousarray(lo)
        self.hi = np.ascontiguousarray(hi)
        self.left = np.ascontiguousarray(left, dtype=np.int32)
        self.right = np.ascontiguousarray(right, dtype=np.int32)
        self.start = np.ascontiguousarray(np.where(leaf, start, 0), dtype=np.int32)
        self.count = np.ascontiguousarray(count, dtype=np.int32)

    @property
    def arrays(self):
        """Kernel argument tuple ``(lo, hi, left, right, start, count, tris)``."""
        return (self.lo, self.hi, self.left, self.right, self.start, self.count, self.tris)

    @property
    def node_count(self):
        return len(self.lo)

    def closest(self, points, backend=None):
        """Nearest surface points.

        Returns ``(distance, face, closest)`` where ``face`` indexes the
        original mesh faces.
        """
        pts = np.array(points, dtype=np.float64).reshape(-1, 3)
        k = kernels if backend is None else kernels.get_backend(backend)
        d2, tri, cp = k.closest_points(*self.arrays, pts)
        return np.sqrt(d2), self.face_index[tri], cp

    def ray_parity(self, origins, dirs, backend=None):
        k = kernels if backend is None else kernels.get_backend(backend)
        o = np.array(origins, dtype=np.float64).reshape(-1, 3)
        d = np.array(dirs, dtype=np.float64).reshape(-1, 3)
        return k.ray_parity(*self.arrays, o, d)


def distance_to_mesh(bvh, p):
    """Unsigned distance from point(s) ``p`` to the mesh surface."""
    p = np.asarray(p, dtype=np.float64)
    d, _, _ = bvh.closest(p)
    return float(d[0]) if p.ndim == 1 else d


def _random_dirs(rng, n):
    d = rng.normal(size=(n, 3))
    return d / np.linalg.norm(d, axis=1, keepdims=True)


def points_inside(bvh, points, seed=0, max_recasts=16, check=True):
    """Ray-parity containment for many points.

    A ray whose hit lands within 1e-9 of a triangle edge or vertex is cast
    again in a fresh random direction.
    """
    if check:
        from .mesh import validate_mesh

        if not validate_mesh(bvh.mesh).watertight:
            raise NotWatertight("point_inside needs a watertight mesh")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    rng = np.random.default_rng(seed)
    result = np.zeros(len(pts), dtype=bool)
    pending = np.arange(len(pts))
    for _ in range(max_recasts):
        if not len(pending):
            break
        cnt, deg = bvh.ray_parity(pts[pending], _random_dirs(rng, len(pending)))
        result[pending] = cnt % 2 == 1
        pending = pending[deg]
    return result


def point_inside(mesh, bvh, p, seed=0):
    """True iff ``p`` lies inside the watertight ``mesh``."""
    return bool(points_inside(bvh, np.asarray(p, dtype=float)[None, :], seed=seed)[0])


def vote_inside(bvh, points, rays=5, seed=0):
    """Majority of ``rays`` random ray-parity votes; tolerates holes."""
    return inside_fraction(bvh, points, rays, seed) > 0.5


def inside_fraction(bvh, points, rays=5, seed=0):
    """Share of ``rays`` random rays that cross the surface an odd number
    of times. On an open surface this estimates the winding number."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    rng = np.random.default_rng(seed)
    votes = np.zeros(len(pts), dtype=np.int64)
    for _ in range(rays):
        cnt, _ = bvh.ray_parity(pts, _random_dirs(rng, len(pts)))
        votes += cnt % 2
    return votes / rays


def winding_number(mesh, points, backend=None):
    """Generalised winding number of each point; exact, O(points x faces)."""
    impl = kernels if backend is None else kernels.get_backend(backend)
    tris = np.ascontiguousarray(mesh.triangles)
    return impl.winding_numbers(tris, np.array(points, dtype=np.float64).reshape(-1, 3))
