"""Voxel-grid spherization."""

import math

import numpy as np

from ..errors import EmptyResult
from ..geometry.bvh import points_inside
from ..geometry.spheres import SphereSet


def spherize_grid(mesh, bvh=None, resolution=0.02, seed=0):
    """One circumscribed sphere per occupied cell of a grid laid from the
    mesh's minimum corner.

    A cell is occupied when its centre is inside the mesh or within
    ``resolution / 2`` of the surface.
    """
    if not resolution > 0:
        raise ValueError("resolution must be positive")
    bvh = bvh or mesh.bvh
    lo, hi = mesh.bounds
    # the small epsilon keeps exact multiples (1.0 / 0.5) from adding a cell
    counts = np.maximum(np.ceil((hi - lo) / resolution - 1e-9), 1).astype(np.int64)
    axes = [lo[i] + resolution * (np.arange(counts[i]) + 0.5) for i in range(3)]
    centers = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, 3)
    d, _, _ = bvh.closest(centers)
    occupied = d <= 0.5 * resolution
    rest = np.nonzero(~occupied)[0]
    if len(rest):
        occupied[rest] = points_inside(bvh, centers[rest], seed=seed)
    if not occupied.any():
        raise EmptyResult("no grid cell is occupied")
    keep = centers[occupied]
    return SphereSet(keep, np.full(len(keep), 0.5 * math.sqrt(3.0) * resolution))
