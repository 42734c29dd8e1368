"""Adaptive medial-axis sphere fitting.

Spheres are centred on medial-ball centres, so they sit inside the shape
and protrude as little as their cover points allow. One level runs:
cluster, fit, merge, optional burst, error-driven refinement, and finally
the coverage-closure pass that makes the whole surface covered.
"""

from dataclasses import dataclass

import numpy as np

from ..errors import NotWatertight, SpherizationFailed
from ..geometry.medial import shrink_balls
from ..geometry.mesh import validate_mesh
from ..geometry.sampling import fibonacci_sphere, sample_surface_arrays
from ..geometry.spheres import SphereSet
from .config import SpherizationConfig
from .coverage import OutsideDepth, close_coverage, sphere_excess
from .tree import SphereTree

KMEANS_ITERS = 50


@dataclass
class _Ball:
    """A fitted sphere together with the cover points and medial balls it
    owns."""

    cover: np.ndarray
    balls: np.ndarray
    center: np.ndarray
    radius: float
    uid: int


def _farthest_point_seeds(points, k):
    chosen = [0]
    d = np.sum((points - points[0]) ** 2, axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(d))
        if d[nxt] <= 0:
            break
        chosen.append(nxt)
        d = np.minimum(d, np.sum((points - points[nxt]) ** 2, axis=1))
    return np.array(chosen)


def weighted_kmeans(points, weights, init, iters=KMEANS_ITERS):
    """Lloyd iterations; ties go to the lowest centroid index. Empty
    clusters keep their centroid."""
    cent = np.array(init, dtype=float)
    labels = None
    for _ in range(iters):
        d2 = ((points[:, None, :] - cent[None]) ** 2).sum(-1)
        new = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for k in range(len(cent)):
            m = labels == k
            if m.any():
                w = weights[m]
                cent[k] = (points[m] * w[:, None]).sum(0) / w.sum()
    return labels


class MedialFitter:
    def __init__(self, mesh, bvh, config):
        self.mesh = mesh
        self.bvh = bvh
        self.cfg = config
        seeds = np.random.SeedSequence(config.seed).generate_state(4)
        self.cover, _, _ = sample_surface_arrays(mesh, config.numCover, int(seeds[0]))
        self.mc, self.mr = self._medial_balls(int(seeds[1]))
        # each cover point belongs to the medial ball whose surface is nearest
        gap = np.abs(np.sqrt(((self.cover[:, None] - self.mc[None]) ** 2).sum(-1)) - self.mr[None])
        self.assign = np.argmin(gap, axis=1)
        self.depth = OutsideDepth(mesh, int(seeds[2]))
        self.tester = fibonacci_sphere(10 ** config.testerLevels)
        self._uid = 0
        self._excess = {}
        self._worst = {}
        self._pairs = {}

    def _medial_balls(self, seed):
        cfg = self.cfg
        init = max(self.mesh.diagonal, 1e-9)
        for attempt, n in enumerate((cfg.initSpheres, 4 * cfg.initSpheres)):
            pts, nrm, _ = sample_surface_arrays(self.mesh, n, seed + attempt)
            c, r, ok = shrink_balls(self.bvh, pts, nrm, init)
            if ok.sum() >= cfg.minSpheres:
                return c[ok], r[ok]
        if ok.sum() == 0:
            raise SpherizationFailed("no medial ball converged")
        raise SpherizationFailed(f"only {int(ok.sum())} medial balls converged, need {cfg.minSpheres}")

    # -- single sphere fits ------------------------------------------------

    def _new(self, cover, balls):
        cover = np.sort(np.asarray(cover))
        balls = np.unique(np.asarray(balls))
        if not len(balls):
            balls = np.unique(self.assign[cover])
        center, radius = self._fit(cover, balls)
        self._uid += 1
        return _Ball(cover, balls, center, radius, self._uid)

    def _fit(self, cover, balls):
        pts = self.cover[cover]
        cand = self.mc[balls]

        def spread(c):
            return np.sqrt(((pts[None] - c[:, None]) ** 2).sum(-1)).max(axis=1)

        if not (self.cfg.optimise and self.cfg.maxOptLevel >= 1):
            best = cand[int(np.argmax(self.mr[balls]))]
            return best, float(spread(best[None])[0])
        rad = spread(cand)
        k = int(np.argmin(rad))
        best, best_r = cand[k], rad[k]
        for _ in range(self.cfg.maxOptLevel):
            mids = 0.5 * (best[None] + cand)
            mr = spread(mids)
            j = int(np.argmin(mr))
            if mr[j] >= best_r:
                break
            best, best_r = mids[j], mr[j]
        return np.array(best), float(best_r)

    def _set(self, balls):
        return SphereSet([b.center for b in balls], [max(b.radius, 1e-12) for b in balls])

    def excess(self, b):
        if b.uid not in self._excess:
            self._excess[b.uid] = float(sphere_excess(self.depth, self._set([b]))[0])
        return self._excess[b.uid]

    def worst(self, b):
        if b.uid not in self._worst:
            pts = b.center + max(b.radius, 1e-12) * self.tester
            self._worst[b.uid] = float(self.depth(pts).max())
        return self._worst[b.uid]

    # -- phases --------------------------------------------------------------

    def cluster(self, cover, balls, k):
        """Split ``cover`` into at most ``k`` groups of medial balls."""
        k = max(1, min(k, len(cover), len(balls)))
        seeds = _farthest_point_seeds(self.cover[cover], k)
        init = self.mc[self.assign[cover[seeds]]]
        labels = weighted_kmeans(self.mc[balls], self.mr[balls], init)
        # cover points follow their ball; a ball outside this subset goes
        # to the nearest centroid of the subset's clusters
        lab_of = dict(zip(balls.tolist(), labels.tolist()))
        own = self.assign[cover]
        missing = np.array([b not in lab_of for b in own.tolist()])
        cover_lab = np.array([lab_of.get(b, -1) for b in own.tolist()])
        if missing.any():
            cents = np.array([self.mc[balls[labels == j]].mean(0) if np.any(labels == j) else np.full(3, np.inf)
                              for j in range(k)])
            d2 = ((self.mc[own[missing]][:, None] - cents[None]) ** 2).sum(-1)
            cover_lab[missing] = np.argmin(d2, axis=1)
        out = []
        for j in range(k):
            cj = cover[cover_lab == j]
            if len(cj):
                out.append(self._new(cj, balls[labels == j]))
        return out

    def _merge_pair(self, a, b):
        return self._new(np.concatenate([a.cover, b.cover]), np.concatenate([a.balls, b.balls]))

    def merge(self, spheres):
        cfg = self.cfg
        # spheres below the cover floor are folded into their best partner
        while len(spheres) > 1:
            small = [i for i, s in enumerate(spheres) if len(s.cover) < cfg.minCover]
            if not small:
                break
            i = min(small, key=lambda t: (len(spheres[t].cover), t))
            options = [(self._pair(spheres[i], spheres[j]).radius, j) for j in range(len(spheres)) if j != i]
            _, j = min(options)
            merged = self._pair(spheres[i], spheres[j])
            spheres = [s for t, s in enumerate(spheres) if t not in (i, j)] + [merged]
        if not cfg.merge:
            return spheres
        while len(spheres) > 1:
            mean_r = float(np.mean([s.radius for s in spheres]))
            best = None
            for i in range(len(spheres)):
                for j in range(i + 1, len(spheres)):
                    a, b = spheres[i], spheres[j]
                    if np.linalg.norm(a.center - b.center) >= a.radius + b.radius:
                        continue
                    m = self._pair(a, b)
                    # growth of protrusion over the worse of the two it replaces
                    delta = self.excess(m) - max(self.excess(a), self.excess(b))
                    if best is None or delta < best[0]:
                        best = (delta, i, j)
            if best is None or best[0] >= cfg.balExcess * mean_r:
                break
            _, i, j = best
            merged = self._pair(spheres[i], spheres[j])
            spheres = [s for t, s in enumerate(spheres) if t not in (i, j)] + [merged]
        return spheres

    def _pair(self, a, b):
        key = (min(a.uid, b.uid), max(a.uid, b.uid))
        if key not in self._pairs:
            self._pairs[key] = self._merge_pair(a, b)
        return self._pairs[key]

    def split(self, s):
        """Halve a sphere's cover points across their principal axis."""
        pts = self.cover[s.cover]
        centered = pts - pts.mean(0)
        _, _, vt = np.linalg.svd(centered, full_matrices=False)
        axis = vt[0]
        proj = centered @ axis
        order = np.argsort(proj, kind="stable")
        half = len(order) // 2
        left, right = s.cover[order[:half]], s.cover[order[half:]]
        cut = 0.5 * (proj[order[half - 1]] + proj[order[half]])
        bproj = (self.mc[s.balls] - pts.mean(0)) @ axis
        return [self._new(left, s.balls[bproj <= cut]), self._new(right, s.balls[bproj > cut])]

    def _splittable(self, s):
        return len(s.cover) >= max(2, 2 * self.cfg.minCover)

    def burst(self, spheres, budget):
        if len(spheres) >= budget:
            return spheres
        cands = [i for i, s in enumerate(spheres) if self._splittable(s)]
        if not cands:
            return spheres
        i = max(cands, key=lambda t: (self.excess(spheres[t]), -t))
        return spheres[:i] + spheres[i + 1:] + self.split(spheres[i])

    def refine(self, spheres, budget):
        while len(spheres) < budget:
            worst = np.array([self.worst(s) for s in spheres])
            limit = self.cfg.erFact * float(np.median(worst))
            cands = [i for i in range(len(spheres)) if worst[i] > limit and self._splittable(spheres[i])]
            if not cands:
                break
            i = max(cands, key=lambda t: (worst[t], -t))
            spheres = spheres[:i] + spheres[i + 1:] + self.split(spheres[i])
        return spheres

    def level(self, cover, balls, budget):
        spheres = self.cluster(cover, balls, budget)
        spheres = self.merge(spheres)
        if self.cfg.burst:
            spheres = self.burst(spheres, budget)
        return self.refine(spheres, budget)

    def finish(self, spheres):
        """Sphere set of a level, closed over the whole surface if expanding."""
        centers = np.array([s.center for s in spheres])
        radii = np.array([max(s.radius, 1e-12) for s in spheres])
        if self.cfg.expand:
            radii = close_coverage(self.mesh, centers, radii)
        return SphereSet(centers, np.maximum(radii, 1e-12))

    def run(self):
        cfg = self.cfg
        all_balls = np.arange(len(self.mr))
        current = self.level(np.arange(len(self.cover)), all_balls, cfg.branch)
        levels = [self.finish(current)]
        for _ in range(cfg.depth - 1):
            nxt = []
            for s in current:
                nxt.extend(self.level(s.cover, s.balls, cfg.branch))
            current = nxt
            levels.append(self.finish(current))
        return levels


def spherize_medial(mesh, bvh=None, config=None):
    """Cover a watertight mesh with at most ``branch**depth`` spheres
    centred on its medial axis.

    Every cover point ends up inside some leaf sphere; with ``expand`` the
    whole surface does.
    """
    config = config or SpherizationConfig()
    if not validate_mesh(mesh).watertight:
        raise NotWatertight("medial spherization needs a watertight mesh")
    bvh = bvh or mesh.bvh
    fitter = MedialFitter(mesh, bvh, config)
    levels = fitter.run()
    leaves = levels[-1]
    if not len(leaves) or not np.all(leaves.contains(fitter.cover)):
        raise SpherizationFailed("fitted spheres do not contain their cover points")
    return SphereTree(levels, method="medial", seed=config.seed, cover_points=fitter.cover)
