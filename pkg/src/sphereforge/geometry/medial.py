"""Shrinking-ball estimation of medial (maximal inscribed) balls."""

import numpy as np

from ..errors import NoConvergence
from .spheres import Sphere

TOL = 1e-6
MAX_ITER = 64


def shrink_balls(bvh, points, normals, init_radius):
    """Batched shrinking ball.

    Each ball starts tangent to the surface at ``points`` with radius
    ``init_radius``, centre pushed inward along the outward ``normals``.
    Whenever a surface point ``q`` is strictly inside, the radius becomes
    that of the ball through ``q`` tangent at the sample:
    ``r = |p - q|^2 / (2 n . (p - q))``.

    Returns ``(centers, radii, ok)``; ``ok`` is False where the iteration
    did not settle within 64 steps or collapsed to zero radius.
    """
    p = np.asarray(points, dtype=float).reshape(-1, 3)
    n = np.asarray(normals, dtype=float).reshape(-1, 3)
    m = len(p)
    r = np.full(m, float(init_radius))
    ok = np.zeros(m, dtype=bool)
    active = np.arange(m)
    for _ in range(MAX_ITER):
        if not len(active):
            break
        c = p[active] - r[active, None] * n[active]
        d, _, q = bvh.closest(c)
        settled = d >= r[active] - TOL
        ok[active[settled]] = True
        move = ~settled
        idx = active[move]
        diff = p[idx] - q[move]
        denom = 2.0 * np.einsum("ij,ij->i", n[idx], diff)
        with np.errstate(divide="ignore", invalid="ignore"):
            new_r = np.einsum("ij,ij->i", diff, diff) / denom
        bad = ~(np.isfinite(new_r) & (new_r > 0))
        new_r = np.where(bad, 0.0, np.minimum(new_r, r[idx]))
        changed = np.abs(r[idx] - new_r) >= TOL
        r[idx] = new_r
        # a step below tolerance counts as converged
        ok[idx[~changed & ~bad]] = True
        active = idx[changed & ~bad]
    centers = p - r[:, None] * n
    ok &= r > 10 * TOL
    return centers, r, ok


def shrink_ball(sample, bvh, init_radius):
    """Maximal inscribed ball tangent at ``sample``'s point."""
    if not init_radius > 0:
        raise ValueError("init_radius must be positive")
    c, r, ok = shrink_balls(bvh, np.asarray(sample.point)[None], np.asarray(sample.normal)[None], init_radius)
    if not ok[0]:
        raise NoConvergence("shrinking ball did not converge")
    return Sphere(tuple(c[0]), float(r[0]))
