"""Coverage checks, exterior excess and the coverage-closure pass."""

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..geometry.bvh import points_inside, vote_inside
from ..geometry.mesh import validate_mesh
from ..geometry.sampling import fibonacci_sphere, sample_surface_arrays

EXCESS_SAMPLES = 100
SLACK = 1e-9


@dataclass(frozen=True)
class CoverageReport:
    samples_tested: int
    fraction_covered: float
    max_uncovered_distance: float
    mean_exterior_excess: float

    def to_dict(self):
        return asdict(self)


class OutsideDepth:
    """Distance outside a mesh: 0 for interior points, the distance to the
    surface otherwise. Open meshes fall back to a ray-vote sign."""

    def __init__(self, mesh, seed=0):
        self.mesh = mesh
        self.bvh = mesh.bvh
        self.watertight = validate_mesh(mesh).watertight
        self.seed = seed

    def __call__(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        if not len(pts):
            return np.zeros(0)
        d, _, _ = self.bvh.closest(pts)
        if self.watertight:
            inside = points_inside(self.bvh, pts, seed=self.seed, check=False)
        else:
            inside = vote_inside(self.bvh, pts, seed=self.seed)
        return np.where(inside, 0.0, d)


def sphere_surface_points(spheres, n):
    """``n`` Fibonacci points on each sphere, shape (len(spheres), n, 3)."""
    dirs = fibonacci_sphere(n)
    return spheres.centers[:, None, :] + spheres.radii[:, None, None] * dirs[None]


def sphere_excess(depth, spheres, n=EXCESS_SAMPLES, reduce="mean"):
    """Per-sphere mean (or max) outside depth over ``n`` surface points."""
    if not len(spheres):
        return np.zeros(0)
    pts = sphere_surface_points(spheres, n)
    d = depth(pts.reshape(-1, 3)).reshape(len(spheres), n)
    return d.max(axis=1) if reduce == "max" else d.mean(axis=1)


def verify_coverage(mesh, spheres, num_samples=500, seed=0):
    """Share of ``num_samples`` surface samples inside the spheres (1e-9
    slack) and the mean exterior excess of the sphere surfaces."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    pts, _, _ = sample_surface_arrays(mesh, num_samples, seed)
    if not len(spheres):
        return CoverageReport(num_samples, 0.0, mesh.diagonal, 0.0)
    gap = spheres.surface_gap(pts)
    covered = gap <= SLACK
    frac = float(covered.mean())
    worst = float(gap[~covered].max()) if not covered.all() else 0.0
    excess = sphere_excess(OutsideDepth(mesh, seed), spheres)
    return CoverageReport(num_samples, frac, worst, float(excess.mean()))


def fidelity_report(mesh, spheres, n=2000, seed=0):
    """Both directions of fit: surface coverage and sphere protrusion."""
    return verify_coverage(mesh, spheres, n, seed)


def tessellate(mesh, max_edge, max_split=64):
    """Triangles of ``mesh`` split uniformly until no edge exceeds
    ``max_edge`` (each face into k*k pieces, k capped at ``max_split``)."""
    tri = mesh.triangles
    edges = np.stack([tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 1], tri[:, 0] - tri[:, 2]], 1)
    longest = np.linalg.norm(edges, axis=2).max(axis=1)
    ks = np.clip(np.ceil(longest / max_edge - 1e-12), 1, max_split).astype(int)
    out = [tri[ks == 1]]
    for k in np.unique(ks[ks > 1]):
        sel = tri[ks == k]
        bary = []
        for i in range(k):
            for j in range(k - i):
                bary.append([(i, j), (i + 1, j), (i, j + 1)])
                if i + j + 1 < k:
                    bary.append([(i + 1, j), (i + 1, j + 1), (i, j + 1)])
        ij = np.array(bary, dtype=float) / k  # (P, 3, 2) weights on corners 1, 2
        w1, w2 = ij[..., 0], ij[..., 1]
        w0 = 1.0 - w1 - w2
        pieces = (w0[None, ..., None] * sel[:, None, None, 0]
                  + w1[None, ..., None] * sel[:, None, None, 1]
                  + w2[None, ..., None] * sel[:, None, None, 2])
        out.append(pieces.reshape(-1, 3, 3))
    return np.concatenate(out)


def closure_edge(mesh, triangles_budget=200_000):
    """Tessellation edge length: 1 % of the diagonal, coarser if the
    surface would need more than ``triangles_budget`` pieces."""
    h = 0.01 * mesh.diagonal
    # an equilateral piece of edge h has area h^2 * sqrt(3) / 4
    needed = 4.0 * mesh.area / (math.sqrt(3.0) * h * h)
    if needed > triangles_budget:
        h *= math.sqrt(needed / triangles_budget)
    return h


def close_coverage(mesh, centers, radii, max_edge=None, chunk=4096):
    """Grow radii until every point of the ``mesh`` surface is covered.

    The surface is cut into small triangles. A sphere containing all three
    corners contains the whole triangle, so each uncovered triangle is
    handed to the sphere that needs the smallest radius increase. Only
    radii change, and only upward.
    """
    centers = np.asarray(centers, dtype=float)
    tris = tessellate(mesh, max_edge or closure_edge(mesh))
    grow = np.array(radii, dtype=float)
    for s in range(0, len(tris), chunk):
        t = tris[s:s + chunk]
        # (T, S): radius sphere s needs to hold all corners of triangle t
        need = np.sqrt(((t[:, :, None, :] - centers[None, None]) ** 2).sum(-1)).max(axis=1)
        covered = np.any(need <= grow[None], axis=1)
        if covered.all():
            continue
        need = need[~covered]
        pick = np.argmin(need - grow[None], axis=1)
        np.maximum.at(grow, pick, need[np.arange(len(pick)), pick])
    return grow

