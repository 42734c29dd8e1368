"""Numpy implementations of the query kernels.

Same signatures and results as the compiled ``_ckernels`` module. Queries
are batched as wavefronts of (query, node) pairs so the BVH is still used,
only without per-point recursion.
"""

import numpy as np

PROBE_DIRS = np.array(
    [
        [0.5773502691896257, 0.5773502691896258, 0.5773502691896257],
        [-0.2672612419124244, 0.8017837257372732, 0.5345224838248488],
        [0.6963106238227914, -0.1740776559556979, -0.6963106238227914],
    ]
)


def _dot(a, b):
    return np.einsum("ij,ij->i", a, b)


def closest_on_triangles(p, a, b, c):
    """Vectorised closest point on triangles ``abc`` to points ``p``.

    All inputs have shape (N, 3). Returns ``(d2, closest)``.
    """
    p = np.asarray(p, dtype=float)
    ab = b - a
    ac = c - a
    ap = p - a
    d1 = _dot(ab, ap)
    d2 = _dot(ac, ap)
    bp = p - b
    d3 = _dot(ab, bp)
    d4 = _dot(ac, bp)
    cp = p - c
    d5 = _dot(ab, cp)
    d6 = _dot(ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    out = np.empty_like(p)
    done = np.zeros(len(p), dtype=bool)

    def assign(mask, value):
        m = mask & ~done
        out[m] = value[m] if value.ndim == 2 else value
        done[m] = True

    with np.errstate(divide="ignore", invalid="ignore"):
        assign((d1 <= 0) & (d2 <= 0), a)
        assign((d3 >= 0) & (d4 <= d3), b)
        v = d1 / (d1 - d3)
        assign((vc <= 0) & (d1 >= 0) & (d3 <= 0), a + v[:, None] * ab)
        assign((d6 >= 0) & (d5 <= d6), c)
        w = d2 / (d2 - d6)
        assign((vb <= 0) & (d2 >= 0) & (d6 <= 0), a + w[:, None] * ac)
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        assign((va <= 0) & ((d4 - d3) >= 0) & ((d5 - d6) >= 0), b + w[:, None] * (c - b))
        denom = va + vb + vc
        assign(denom <= 0, a)
        v = vb / denom
        w = vc / denom
        assign(np.ones(len(p), dtype=bool), a + ab * v[:, None] + ac * w[:, None])
    diff = p - out
    return _dot(diff, diff), out


def _box_dist2(p, lo, hi):
    d = np.maximum(lo - p, 0.0) + np.maximum(p - hi, 0.0)
    return _dot(d, d)


def _expand_leaves(q, nodes, start, count):
    """(query, leaf) pairs -> (query, triangle) pairs."""
    cnt = count[nodes]
    qq = np.repeat(q, cnt)
    offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    return qq, np.repeat(start[nodes], cnt) + offs


def closest_points(lo, hi, left, right, start, count, tris, points):
    points = np.ascontiguousarray(points, dtype=float)
    n = len(points)
    best = np.full(n, np.inf)
    best_tri = np.full(n, -1, dtype=np.int64)
    best_pt = np.zeros((n, 3))
    q = np.arange(n)
    nodes = np.zeros(n, dtype=np.int64)
    while len(q):
        keep = _box_dist2(points[q], lo[nodes], hi[nodes]) < best[q]
        q, nodes = q[keep], nodes[keep]
        leaf = count[nodes] > 0
        if leaf.any():
            tq, ti = _expand_leaves(q[leaf], nodes[leaf], start, count)
            d2, cp = closest_on_triangles(points[tq], tris[ti, 0], tris[ti, 1], tris[ti, 2])
            # per query, first minimum in triangle order (matches the scalar scan)
            order = np.lexsort((ti, d2, tq))
            tq, ti, d2, cp = tq[order], ti[order], d2[order], cp[order]
            first = np.ones(len(tq), dtype=bool)
            first[1:] = tq[1:] != tq[:-1]
            tq, ti, d2, cp = tq[first], ti[first], d2[first], cp[first]
            better = d2 < best[tq]
            tq = tq[better]
            best[tq] = d2[better]
            best_tri[tq] = ti[better]
            best_pt[tq] = cp[better]
        inner = ~leaf
        iq, inodes = q[inner], nodes[inner]
        q = np.concatenate([iq, iq])
        nodes = np.concatenate([left[inodes], right[inodes]]).astype(np.int64)
    return best, best_tri, best_pt


def _ray_hits(o, d, a, b, c, eps):
    """Moller-Trumbore on (ray, triangle) pairs -> (hit, degenerate)."""
    e1 = b - a
    e2 = c - a
    pv = np.cross(d, e2)
    det = _dot(e1, pv)
    with np.errstate(divide="ignore", invalid="ignore"):
        idet = 1.0 / det
        tv = o - a
        u = _dot(tv, pv) * idet
        qv = np.cross(tv, e1)
        v = _dot(d, qv) * idet
        t = _dot(e2, qv) * idet
    valid = (det != 0) & (u >= -eps) & (u <= 1 + eps) & (v >= -eps) & (u + v <= 1 + eps) & (t >= -eps)
    deg = valid & ((t <= eps) | (u <= eps) | (v <= eps) | (u + v >= 1 - eps))
    return valid & (t > 0), deg


def ray_parity(lo, hi, left, right, start, count, tris, origins, dirs, eps=1e-9):
    origins = np.ascontiguousarray(origins, dtype=float)
    dirs = np.ascontiguousarray(dirs, dtype=float)
    n = len(origins)
    counts = np.zeros(n, dtype=np.int64)
    degenerate = np.zeros(n, dtype=bool)
    with np.errstate(divide="ignore"):
        inv = np.where(dirs != 0, 1.0 / np.where(dirs != 0, dirs, 1.0), np.inf)
    q = np.arange(n)
    nodes = np.zeros(n, dtype=np.int64)
    while len(q):
        o = origins[q]
        with np.errstate(invalid="ignore"):
            t1 = (lo[nodes] - o) * inv[q]
            t2 = (hi[nodes] - o) * inv[q]
        tmin = np.maximum(np.minimum(t1, t2).max(axis=1), 0.0)
        tmax = np.maximum(t1, t2).min(axis=1)
        keep = tmin <= tmax
        q, nodes = q[keep], nodes[keep]
        leaf = count[nodes] > 0
        if leaf.any():
            tq, ti = _expand_leaves(q[leaf], nodes[leaf], start, count)
            hit, deg = _ray_hits(origins[tq], dirs[tq], tris[ti, 0], tris[ti, 1], tris[ti, 2], eps)
            np.add.at(counts, tq, hit.astype(np.int64))
            np.logical_or.at(degenerate, tq, deg)
        inner = ~leaf
        iq, inodes = q[inner], nodes[inner]
        q = np.concatenate([iq, iq])
        nodes = np.concatenate([left[inodes], right[inodes]]).astype(np.int64)
    return counts, degenerate


# ---------------------------------------------------------------------------
# obstacle queries (bench); brute force over triangles

def winding_numbers(tris, points, chunk=2048):
    """Generalised winding number of each point (solid-angle sum / 4 pi)."""
    tris = np.asarray(tris, dtype=float)
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    out = np.empty(len(points))
    for s in range(0, len(points), max(1, chunk * 64 // max(len(tris), 1))):
        p = points[s:s + max(1, chunk * 64 // max(len(tris), 1))]
        a = tris[None, :, 0] - p[:, None]
        b = tris[None, :, 1] - p[:, None]
        c = tris[None, :, 2] - p[:, None]
        la = np.linalg.norm(a, axis=2)
        lb = np.linalg.norm(b, axis=2)
        lc = np.linalg.norm(c, axis=2)
        det = np.einsum("ijk,ijk->ij", a, np.cross(b, c))
        den = (la * lb * lc + np.einsum("ijk,ijk->ij", a, b) * lc
               + np.einsum("ijk,ijk->ij", a, c) * lb + np.einsum("ijk,ijk->ij", b, c) * la)
        out[s:s + len(p)] = 2.0 * np.arctan2(det, den).sum(axis=1) / (4.0 * np.pi)
    return out


def tri_box_overlap(v0, v1, v2, h):
    """SAT test for triangles (box frame, each (N, 3)) against a centred box."""
    sep = np.zeros(len(v0), dtype=bool)
    mn = np.minimum(np.minimum(v0, v1), v2)
    mx = np.maximum(np.maximum(v0, v1), v2)
    sep |= np.any((mn > h) | (mx < -h), axis=1)
    e = [v1 - v0, v2 - v1, v0 - v2]
    n = np.cross(e[0], e[1])
    r = np.abs(n) @ h
    sep |= np.abs(_dot(n, v0)) > r
    zero = np.zeros(len(v0))
    for ei in e:
        for ax in (
            np.stack([zero, ei[:, 2], -ei[:, 1]], axis=1),
            np.stack([-ei[:, 2], zero, ei[:, 0]], axis=1),
            np.stack([ei[:, 1], -ei[:, 0], zero], axis=1),
        ):
            p0, p1, p2 = _dot(ax, v0), _dot(ax, v1), _dot(ax, v2)
            r = np.abs(ax) @ h
            sep |= (np.minimum(np.minimum(p0, p1), p2) > r) | (np.maximum(np.maximum(p0, p1), p2) < -r)
    return ~sep


def seg_seg_dist2(p1, q1, p2, q2):
    """Vectorised squared distance between segments p1q1 and p2q2."""
    d1 = q1 - p1
    d2 = q2 - p2
    r = p1 - p2
    a = _dot(d1, d1)
    e = _dot(d2, d2)
    f = _dot(d2, r)
    c = _dot(d1, r)
    b = _dot(d1, d2)
    tiny = 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = a * e - b * b
        s = np.where(denom != 0, np.clip((b * f - c * e) / denom, 0, 1), 0.0)
        t = (b * s + f) / e
        s = np.where(t < 0, np.clip(-c / a, 0, 1), np.where(t > 1, np.clip((b - c) / a, 0, 1), s))
        t = np.clip(t, 0, 1)
        # degenerate segments
        pt_a = a <= tiny
        pt_e = e <= tiny
        s = np.where(pt_a, 0.0, np.where(pt_e, np.clip(-c / a, 0, 1), s))
        t = np.where(pt_a, np.clip(f / e, 0, 1), np.where(pt_e, 0.0, t))
        t = np.where(pt_a & pt_e, 0.0, t)
    diff = (p1 + d1 * s[:, None]) - (p2 + d2 * t[:, None])
    return _dot(diff, diff)


def _point_box_dist2(p, h):
    t = np.maximum(np.abs(p) - h, 0.0)
    return _dot(t, t)


_CORNER_SIGNS = np.array([[1 if i & 1 else -1, 1 if i & 2 else -1, 1 if i & 4 else -1] for i in range(8)], float)
_BOX_EDGES = [(i, i | (1 << k)) for i in range(8) for k in range(3) if not i & (1 << k)]


def tri_box_dist2(v0, v1, v2, h):
    """Squared distance from triangles (box frame) to a centred box."""
    best = np.minimum(np.minimum(_point_box_dist2(v0, h), _point_box_dist2(v1, h)), _point_box_dist2(v2, h))
    corners = _CORNER_SIGNS * h
    n = len(v0)
    for corner in corners:
        d2, _ = closest_on_triangles(np.broadcast_to(corner, (n, 3)), v0, v1, v2)
        best = np.minimum(best, d2)
    tv = (v0, v1, v2)
    for i, j in _BOX_EDGES:
        pa = np.broadcast_to(corners[i], (n, 3))
        pb = np.broadcast_to(corners[j], (n, 3))
        for a in range(3):
            best = np.minimum(best, seg_seg_dist2(pa, pb, tv[a], tv[(a + 1) % 3]))
    best[tri_box_overlap(v0, v1, v2, h)] = 0.0
    return best


def _inside(p, lo, hi, left, right, start, count, tris):
    if np.any(p < lo[0]) or np.any(p > hi[0]):
        return False
    n = 0
    for d in PROBE_DIRS:
        cnt, deg = ray_parity(lo, hi, left, right, start, count, tris, p[None, :], d[None, :])
        n = int(cnt[0])
        if not deg[0]:
            break
    return n % 2 == 1


def _boxes_in_link(rot, trans, box_c, box_rot):
    """Per box: centre in link frame and link->box rotation."""
    for b in range(len(box_c)):
        rb = box_rot[3 * b:3 * b + 3]
        yield b, rot.T @ (box_c[b] - trans), rb.T @ rot


def mesh_env_collide(lo, hi, left, right, start, count, tris, solid, rot, trans,
                     box_c, box_rot, box_h, sph_c, sph_r):
    for b, c, m in _boxes_in_link(rot, trans, box_c, box_rot):
        v = (tris - c) @ m.T
        if tri_box_overlap(v[:, 0], v[:, 1], v[:, 2], box_h[b]).any():
            return True
        if solid:
            if np.all(np.abs(v[0, 0]) <= box_h[b]):
                return True
            if _inside(c, lo, hi, left, right, start, count, tris):
                return True
    for s in range(len(sph_c)):
        c = rot.T @ (sph_c[s] - trans)
        d2, _ = closest_on_triangles(np.broadcast_to(c, (len(tris), 3)), tris[:, 0], tris[:, 1], tris[:, 2])
        if d2.min() < sph_r[s] * sph_r[s] * (1.0 + 1e-12) + 1e-300:
            return True
        if solid:
            if np.sum((tris[0, 0] - c) ** 2) <= sph_r[s] ** 2:
                return True
            if _inside(c, lo, hi, left, right, start, count, tris):
                return True
    return False


def mesh_env_distance(lo, hi, left, right, start, count, tris, solid, rot, trans,
                      box_c, box_rot, box_h, sph_c, sph_r):
    best = np.inf
    for b, c, m in _boxes_in_link(rot, trans, box_c, box_rot):
        v = (tris - c) @ m.T
        d2 = tri_box_dist2(v[:, 0], v[:, 1], v[:, 2], box_h[b]).min()
        if d2 == 0.0:
            return 0.0
        if solid:
            if np.all(np.abs(v[0, 0]) <= box_h[b]):
                return 0.0
            if _inside(c, lo, hi, left, right, start, count, tris):
                return 0.0
        best = min(best, float(np.sqrt(d2)))
    for s in range(len(sph_c)):
        c = rot.T @ (sph_c[s] - trans)
        if solid and _inside(c, lo, hi, left, right, start, count, tris):
            return 0.0
        d2, _ = closest_on_triangles(np.broadcast_to(c, (len(tris), 3)), tris[:, 0], tris[:, 1], tris[:, 2])
        d = float(np.sqrt(d2.min())) - sph_r[s]
        if d <= 0.0:
            return 0.0
        best = min(best, d)
    return best


def _posed_centres(centers, rot, trans):
    return centers @ rot.T + trans


def spheres_env_collide(centers, radii, rot, trans, box_c, box_rot, box_h, sph_c, sph_r):
    w = _posed_centres(centers, rot, trans)
    if len(sph_c):
        d2 = ((w[:, None, :] - sph_c[None, :, :]) ** 2).sum(axis=2)
        rs = radii[:, None] + sph_r[None, :]
        if np.any(d2 <= rs * rs):
            return True
    for b in range(len(box_c)):
        p = (w - box_c[b]) @ box_rot[3 * b:3 * b + 3]
        if np.any(_point_box_dist2(p, box_h[b]) <= radii * radii):
            return True
    return False


def spheres_env_distance(centers, radii, rot, trans, box_c, box_rot, box_h, sph_c, sph_r):
    w = _posed_centres(centers, rot, trans)
    best = np.inf
    if len(sph_c):
        d = np.sqrt(((w[:, None, :] - sph_c[None, :, :]) ** 2).sum(axis=2)) - radii[:, None] - sph_r[None, :]
        best = min(best, float(d.min()))
    for b in range(len(box_c)):
        p = (w - box_c[b]) @ box_rot[3 * b:3 * b + 3]
        t = np.abs(p) - box_h[b]
        outside = np.sqrt((np.maximum(t, 0.0) ** 2).sum(axis=1))
        inside = -np.min(-t, axis=1)
        sd = np.where(np.any(t > 0, axis=1), outside, inside)
        best = min(best, float((sd - radii).min()))
    return best
