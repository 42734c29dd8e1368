"""Quadric-error edge-collapse simplification."""

import heapq
import math

import numpy as np

from ..errors import NotWatertight
from ..geometry.mesh import TriangleMesh, validate_mesh

COND_LIMIT = 1e8
MIN_FACES = 4
# a flip must cut the local deviation from the input by at least 1 %
FLIP_GAIN = 0.99


def _face_quadrics(verts, faces):
    tri = verts[faces]
    n = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    norm = np.linalg.norm(n, axis=1)
    n = n / np.where(norm > 0, norm, 1.0)[:, None]
    plane = np.concatenate([n, -np.einsum("ij,ij->i", n, tri[:, 0])[:, None]], axis=1)
    # area weighting keeps dense regions from dominating the error
    area = 0.5 * norm
    return area[:, None, None] * plane[:, :, None] * plane[:, None, :]


def _cross(u, v):
    # np.cross carries heavy per-call overhead on these small batches
    return np.stack([u[:, 1] * v[:, 2] - u[:, 2] * v[:, 1],
                     u[:, 2] * v[:, 0] - u[:, 0] * v[:, 2],
                     u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]], axis=1)


def _normal(a, b, c):
    ux, uy, uz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    vx, vy, vz = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    return (uy * vz - uz * vy, uz * vx - ux * vz, ux * vy - uy * vx)


class _Collapser:
    """Mutable working state: positions, live faces, vertex -> face sets."""

    def __init__(self, mesh):
        self.ref = mesh.bvh
        self.pos = [tuple(v) for v in mesh.vertices.tolist()]
        self.faces = {i: list(f) for i, f in enumerate(mesh.faces.tolist())}
        self.vfaces = [set() for _ in range(len(mesh.vertices))]
        for fi, f in self.faces.items():
            for v in f:
                self.vfaces[v].add(fi)
        fq = _face_quadrics(mesh.vertices, mesh.faces)
        self.q = np.zeros((len(mesh.vertices), 4, 4))
        np.add.at(self.q, mesh.faces.reshape(-1), np.repeat(fq, 3, axis=0))
        self.stamp = [0] * len(mesh.vertices)
        self.alive = [True] * len(mesh.vertices)
        self.seq = 0

    def ring(self, v):
        out = set()
        for fi in self.vfaces[v]:
            out.update(self.faces[fi])
        out.discard(v)
        return out

    def targets(self, us, vs):
        """Cheapest placement and cost for collapsing each edge (u, v)."""
        us = np.asarray(us)
        vs = np.asarray(vs)
        q = self.q[us] + self.q[vs]
        a, b, c = q[:, :3, :3], q[:, :3, 3], q[:, 3, 3]
        pu = np.array([self.pos[i] for i in us.tolist()]).reshape(-1, 3)
        pv = np.array([self.pos[i] for i in vs.tolist()]).reshape(-1, 3)
        cands = np.stack([pu, pv, 0.5 * (pu + pv)], axis=1)
        cost = np.einsum("nki,nij,nkj->nk", cands, a, cands) + 2.0 * np.einsum("nki,ni->nk", cands, b) + c[:, None]
        pick = np.argmin(cost, axis=1)
        x = cands[np.arange(len(us)), pick]
        best = cost[np.arange(len(us)), pick]
        ok = np.linalg.cond(a) < COND_LIMIT
        if ok.any():
            xo = np.linalg.solve(a[ok], -b[ok][:, :, None])[:, :, 0]
            x[ok] = xo
            best[ok] = np.einsum("ni,nij,nj->n", xo, a[ok], xo) + 2.0 * np.einsum("ni,ni->n", xo, b[ok]) + c[ok]
        return x, np.maximum(best, 0.0)

    def push(self, heap, u, others):
        others = list(others)
        if not others:
            return
        us = [min(u, w) for w in others]
        vs = [max(u, w) for w in others]
        xs, costs = self.targets(us, vs)
        for a, b, x, cost in zip(us, vs, xs, costs.tolist()):
            pa, pb = self.pos[a], self.pos[b]
            # shorter edges first among equal costs; flat regions then thin
            # out evenly instead of collapsing into one high-valence hub
            length = (pa[0] - pb[0]) ** 2 + (pa[1] - pb[1]) ** 2 + (pa[2] - pb[2]) ** 2
            self.seq += 1
            heapq.heappush(heap, (cost, length, self.seq, a, b, self.stamp[a], self.stamp[b], x))

    def valid(self, u, v, x):
        # link condition keeps the surface a 2-manifold
        if len(self.ring(u) & self.ring(v)) != 2:
            return False
        pos = self.pos
        x = (float(x[0]), float(x[1]), float(x[2]))
        for w, other in ((u, v), (v, u)):
            for fi in self.vfaces[w]:
                f = self.faces[fi]
                if other in f:
                    continue
                p = [pos[k] for k in f]
                before = _normal(p[0], p[1], p[2])
                p[f.index(w)] = x
                after = _normal(p[0], p[1], p[2])
                nb = before[0] ** 2 + before[1] ** 2 + before[2] ** 2
                na = after[0] ** 2 + after[1] ** 2 + after[2] ** 2
                dot = before[0] * after[0] + before[1] * after[1] + before[2] * after[2]
                if na <= 1e-24 * nb or dot < 0:
                    return False
        return True

    def is_edge(self, a, b):
        return any(b in self.faces[fi] for fi in self.vfaces[a])

    def _flip_candidates(self, edges):
        """Quads around each edge as ``(p, q, c, d, f1, f2)`` with
        ``f1 = (p, q, c)`` and ``f2 = (q, p, d)``."""
        out = []
        for a, b in edges:
            shared = [fi for fi in self.vfaces[a] if b in self.faces[fi]]
            if len(shared) != 2:
                continue
            f1, f2 = shared
            t = self.faces[f1]
            k = t.index(a)
            if t[(k + 1) % 3] != b:
                a, b = b, a
                k = t.index(a)
            c = t[(k + 2) % 3]
            d = next(w for w in self.faces[f2] if w != a and w != b)
            if c != d and not self.is_edge(c, d):
                out.append((a, b, c, d, f1, f2))
        return out

    def flip_around(self, u):
        """Flip edges near ``u`` whose other diagonal hugs the input
        surface more closely. Returns the new diagonals."""
        edges = set()
        for fi in self.vfaces[u]:
            t = self.faces[fi]
            for k in range(3):
                a, b = t[k], t[(k + 1) % 3]
                edges.add((min(a, b), max(a, b)))
        quads = self._flip_candidates(sorted(edges))
        if not quads:
            return []
        corners = np.array([[self.pos[k] for k in quad[:4]] for quad in quads])
        p, q, c, d = (corners[:, i] for i in range(4))
        pts = np.concatenate([(p + q + c) / 3.0, (p + q + d) / 3.0, 0.5 * (p + q),
                              (p + d + c) / 3.0, (q + c + d) / 3.0, 0.5 * (c + d)])
        dist = self.ref.closest(pts)[0].reshape(6, -1)
        old = dist[:3].max(axis=0)
        new = dist[3:].max(axis=0)
        before = _cross(q - p, c - p) + _cross(p - q, d - q)
        n1 = _cross(d - p, c - p)
        n2 = _cross(c - q, d - q)
        good = (new < FLIP_GAIN * old) & (np.einsum("ij,ij->i", n1, before) > 0) \
            & (np.einsum("ij,ij->i", n2, before) > 0)
        made = []
        touched = set()
        for i in np.argsort(new - old, kind="stable"):
            if not good[i]:
                continue
            a, b, c_, d_, f1, f2 = quads[i]
            if f1 in touched or f2 in touched or self.is_edge(c_, d_):
                continue
            self.faces[f1] = [a, d_, c_]
            self.faces[f2] = [b, c_, d_]
            self.vfaces[b].discard(f1)
            self.vfaces[d_].add(f1)
            self.vfaces[a].discard(f2)
            self.vfaces[c_].add(f2)
            touched.update((f1, f2))
            made.append((c_, d_))
        return made

    def collapse(self, u, v, x):
        """Merge v into u at position x; returns the number of faces removed."""
        removed = 0
        for fi in list(self.vfaces[v]):
            f = self.faces[fi]
            if u in f:
                for k in f:
                    self.vfaces[k].discard(fi)
                del self.faces[fi]
                removed += 1
            else:
                f[f.index(v)] = u
                self.vfaces[u].add(fi)
        self.vfaces[v] = set()
        self.alive[v] = False
        self.pos[u] = (float(x[0]), float(x[1]), float(x[2]))
        self.q[u] = self.q[u] + self.q[v]
        self.stamp[u] += 1
        self.stamp[v] += 1
        return removed


def simplify_qem(mesh, ratio):
    """Collapse edges cheapest-first until at most ``ceil(ratio * F)`` faces
    (never fewer than 4) remain.

    Each collapse moves the merged vertex to the quadric-optimal point, or
    to the best of the endpoints and midpoint when the quadric is near
    singular. Collapses that would flip a face, create a zero-area face or
    violate the link condition are skipped, so a closed input stays closed.
    After each collapse, edges around the merged vertex are flipped where
    the other diagonal lies closer to the input surface; flips never
    change the face count.
    If every remaining candidate is rejected the result can stay above the
    target.
    """
    if not 0 < ratio <= 1:
        raise ValueError("ratio must be in (0, 1]")
    if not validate_mesh(mesh).watertight:
        raise NotWatertight("simplification needs a watertight mesh")
    n_faces = len(mesh.faces)
    target = max(MIN_FACES, math.ceil(ratio * n_faces))
    if n_faces <= target:
        return mesh

    st = _Collapser(mesh)
    edges = mesh.edges_unique()
    xs, costs = st.targets(edges[:, 0], edges[:, 1])
    d2 = np.sum((mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]]) ** 2, axis=1)
    heap = [(c, l, i, a, b, 0, 0, x) for i, (c, l, (a, b), x) in
            enumerate(zip(costs.tolist(), d2.tolist(), edges.tolist(), xs))]
    heapq.heapify(heap)
    st.seq = len(heap)
    count = n_faces
    while count > target and heap:
        _, _, _, u, v, su, sv, x = heapq.heappop(heap)
        if not (st.alive[u] and st.alive[v]) or st.stamp[u] != su or st.stamp[v] != sv:
            continue
        # a flip may have removed the edge since it was queued
        if not st.is_edge(u, v):
            continue
        # a closed surface loses two faces per collapse; below six that
        # would leave fewer than four
        if count - 2 < MIN_FACES or not st.valid(u, v, x):
            continue
        count -= st.collapse(u, v, x)
        st.push(heap, u, sorted(st.ring(u)))
        # flips keep the remaining edges short where the surface curves,
        # so later collapses spread evenly instead of growing hubs
        for c, d in st.flip_around(u):
            st.push(heap, c, [d])

    faces = np.array([st.faces[k] for k in sorted(st.faces)], dtype=np.int64).reshape(-1, 3)
    return TriangleMesh(np.array(st.pos), faces).compact()
