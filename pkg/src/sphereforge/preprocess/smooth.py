"""Laplacian smoothing with the Humphrey (HC) back-projection step."""

import numpy as np
from scipy.sparse import csr_matrix

from ..errors import NotWatertight
from ..geometry.mesh import TriangleMesh, validate_mesh


def _umbrella(mesh):
    """Row-normalised 1-ring averaging operator."""
    indptr, indices = mesh.vertex_neighbors()
    deg = np.diff(indptr)
    weights = np.repeat(1.0 / np.maximum(deg, 1), deg)
    n = len(mesh.vertices)
    return csr_matrix((weights, indices, indptr), shape=(n, n))


def smooth_manifold(mesh, iterations=10, alpha=0.1, beta=0.6):
    """HC-Laplacian smoothing; vertex count and face list are untouched.

    Each pass moves every vertex to its 1-ring average ``q`` and then pushes
    it back by a blend of its own and its neighbours' displacement
    ``b = q - (alpha * o + (1 - alpha) * p)``, where ``o`` is the original
    position. This cancels most of the shrinkage of plain Laplacian steps.
    """
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    if not (0 <= alpha <= 1 and 0 <= beta <= 1):
        raise ValueError("alpha and beta must lie in [0, 1]")
    if not validate_mesh(mesh).watertight:
        raise NotWatertight("smoothing needs a watertight mesh")
    if iterations == 0:
        return mesh
    avg = _umbrella(mesh)
    o = mesh.vertices.copy()
    p = o.copy()
    for _ in range(iterations):
        q = avg @ p
        b = q - (alpha * o + (1.0 - alpha) * p)
        p = q - (beta * b + (1.0 - beta) * (avg @ b))
    return TriangleMesh(p, mesh.faces)
