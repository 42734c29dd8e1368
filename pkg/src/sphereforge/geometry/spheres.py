"""Sphere primitives and sphere sets."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Sphere:
    center: tuple
    radius: float

    def __post_init__(self):
        c = tuple(float(x) for x in self.center)
        if len(c) != 3 or not all(np.isfinite(c)):
            raise ValueError("sphere center must be three finite numbers")
        r = float(self.radius)
        if not (np.isfinite(r) and r > 0):
            raise ValueError("sphere radius must be positive and finite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", r)

    def contains(self, p, slack=1e-9):
        return float(np.linalg.norm(np.asarray(p, dtype=float) - self.center)) <= self.radius + slack


class SphereSet:
    """Ordered collection of spheres stored as arrays.

    Iterating yields :class:`Sphere` objects; ``centers`` and ``radii``
    give the vectorised view.
    """

    def __init__(self, centers=(), radii=()):
        c = np.array(centers, dtype=float).reshape(-1, 3)
        r = np.array(radii, dtype=float).reshape(-1)
        if len(c) != len(r):
            raise ValueError("centers and radii differ in length")
        if len(r) and not (np.all(r > 0) and np.all(np.isfinite(r)) and np.all(np.isfinite(c))):
            raise ValueError("spheres need finite centers and positive radii")
        self.centers = c
        self.radii = r

    @classmethod
    def of(cls, spheres):
        spheres = list(spheres)
        return cls([s.center for s in spheres], [s.radius for s in spheres])

    def __len__(self):
        return len(self.radii)

    def __iter__(self):
        for c, r in zip(self.centers, self.radii):
            yield Sphere(tuple(c), r)

    def __getitem__(self, i):
        return Sphere(tuple(self.centers[i]), self.radii[i])

    def __eq__(self, other):
        if not isinstance(other, SphereSet):
            return NotImplemented
        return np.array_equal(self.centers, other.centers) and np.array_equal(self.radii, other.radii)

    __hash__ = None

    def __repr__(self):
        return f"SphereSet({len(self)} spheres)"

    def canonical(self):
        """Copy sorted by (x, y, z, radius)."""
        if not len(self):
            return SphereSet()
        order = np.lexsort((self.radii, self.centers[:, 2], self.centers[:, 1], self.centers[:, 0]))
        return SphereSet(self.centers[order], self.radii[order])

    def transformed(self, matrix):
        m = np.asarray(matrix, dtype=float)
        return SphereSet(self.centers @ m[:3, :3].T + m[:3, 3], self.radii)

    def contains(self, points, slack=1e-9):
        """Boolean mask: which points lie in at least one sphere."""
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        if not len(self):
            return np.zeros(len(pts), dtype=bool)
        out = np.zeros(len(pts), dtype=bool)
        for s in range(0, len(pts), 4096):
            chunk = pts[s:s + 4096]
            d2 = ((chunk[:, None, :] - self.centers[None]) ** 2).sum(-1)
            out[s:s + 4096] = np.any(np.sqrt(d2) <= self.radii + slack, axis=1)
        return out

    def surface_gap(self, points):
        """Signed distance from each point to the nearest sphere surface."""
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        out = np.empty(len(pts))
        for s in range(0, len(pts), 4096):
            chunk = pts[s:s + 4096]
            d = np.sqrt(((chunk[:, None, :] - self.centers[None]) ** 2).sum(-1)) - self.radii
            out[s:s + 4096] = d.min(axis=1)
        return out

    @staticmethod
    def concatenate(sets):
        sets = [s for s in sets if len(s)]
        if not sets:
            return SphereSet()
        return SphereSet(np.concatenate([s.centers for s in sets]), np.concatenate([s.radii for s in sets]))
