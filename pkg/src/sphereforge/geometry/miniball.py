"""Smallest enclosing sphere (randomised incremental Welzl)."""

import numpy as np

from .spheres import Sphere

MIN_RADIUS = 1e-12


def _ball2(a, b):
    c = (a + b) / 2.0
    return c, float(np.sum((a - c) ** 2))


def _ball3(a, b, c):
    u = b - a
    v = c - a
    w = np.cross(u, v)
    ww = float(w @ w)
    if ww <= 1e-24 * max(float(u @ u), float(v @ v)) ** 2:
        # collinear: the two farthest points span the ball
        return max((_ball2(a, b), _ball2(a, c), _ball2(b, c)), key=lambda t: t[1])
    center = a + (float(u @ u) * np.cross(v, w) + float(v @ v) * np.cross(w, u)) / (2.0 * ww)
    return center, float(np.sum((a - center) ** 2))


def _ball4(a, b, c, d):
    m = np.array([b - a, c - a, d - a])
    rhs = 0.5 * np.array([m[0] @ m[0], m[1] @ m[1], m[2] @ m[2]])
    det = np.linalg.det(m)
    scale = max(np.abs(m).max(), 1e-300) ** 3
    if abs(det) > 1e-12 * scale:
        x = np.linalg.solve(m, rhs)
        return a + x, float(x @ x)
    # coplanar: smallest circumball of a triple that holds the fourth point
    pts = (a, b, c, d)
    best = None
    for skip in range(4):
        tri = [pts[k] for k in range(4) if k != skip]
        cen, r2 = _ball3(*tri)
        if np.sum((pts[skip] - cen) ** 2) <= r2 * (1 + 1e-9) + 1e-30 and (best is None or r2 < best[1]):
            best = (cen, r2)
    return best if best is not None else _ball3(a, b, c)


def _boundary_ball(support):
    if len(support) == 1:
        return support[0].copy(), 0.0
    if len(support) == 2:
        return _ball2(*support)
    if len(support) == 3:
        return _ball3(*support)
    return _ball4(*support)


def _first_outside(pts, lo, hi, center, r2, eps):
    if lo >= hi:
        return -1
    d2 = np.sum((pts[lo:hi] - center) ** 2, axis=1)
    out = np.nonzero(d2 > r2 + eps * (np.sqrt(r2) + eps))[0]
    return lo + int(out[0]) if len(out) else -1


def _welzl(pts, limit, support, eps):
    """Smallest ball of pts[:limit] with ``support`` on its boundary."""
    if support:
        center, r2 = _boundary_ball(support)
        k = 0
    else:
        center, r2 = pts[0].copy(), 0.0
        k = 1
    if len(support) == 4:
        return center, r2
    while True:
        k = _first_outside(pts, k, limit, center, r2, eps)
        if k < 0:
            return center, r2
        center, r2 = _welzl(pts, k, support + [pts[k]], eps)
        k += 1


def enclosing_ball(points, seed=0):
    """Centre and radius of the smallest ball containing ``points``."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if not len(pts):
        raise ValueError("need at least one point")
    pts = pts[np.random.default_rng(seed).permutation(len(pts))]
    span = float(np.ptp(pts, axis=0).max()) if len(pts) > 1 else 0.0
    eps = 1e-12 * max(span, 1e-300)
    center, r2 = _welzl(pts, len(pts), [], eps)
    # the permuted scan guarantees containment up to eps; absorb the residue
    r = max(float(np.sqrt(r2)), float(np.sqrt(np.sum((pts - center) ** 2, axis=1)).max()))
    return np.asarray(center, dtype=float), r


def minimal_enclosing_sphere(points, seed=0):
    """Smallest sphere containing every point; radius clamped to 1e-12."""
    c, r = enclosing_ball(points, seed)
    return Sphere(tuple(c), max(r, MIN_RADIUS))
