"""Area-weighted surface sampling."""

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateMesh


@dataclass(frozen=True)
class SurfaceSample:
    point: np.ndarray
    normal: np.ndarray
    face_index: int


def sample_surface_arrays(mesh, n, seed):
    """Vectorised sampler: returns ``(points, normals, face_index)``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    areas = mesh.face_areas
    total = areas.sum()
    if not total > 0:
        raise DegenerateMesh("mesh has zero surface area")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(areas) / total
    face = np.searchsorted(cdf, rng.random(n), side="right")
    face = np.minimum(face, len(areas) - 1)
    r1 = np.sqrt(rng.random(n))
    r2 = rng.random(n)
    tri = mesh.triangles[face]
    pts = (
        (1.0 - r1)[:, None] * tri[:, 0]
        + (r1 * (1.0 - r2))[:, None] * tri[:, 1]
        + (r1 * r2)[:, None] * tri[:, 2]
    )
    return pts, mesh.face_normals[face], face


def sample_surface(mesh, n, seed):
    """``n`` area-weighted samples, uniform within each face."""
    pts, nrm, face = sample_surface_arrays(mesh, n, seed)
    return [SurfaceSample(tuple(p.tolist()), tuple(q.tolist()), int(f)) for p, q, f in zip(pts, nrm, face)]


def fibonacci_sphere(n):
    """Near-uniform unit vectors on the sphere (deterministic)."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = np.pi * (3.0 - 5 ** 0.5) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
