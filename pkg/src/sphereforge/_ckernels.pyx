# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled query kernels.

Every function here has a numpy twin in ``_pykernels`` with the same
signature and results; ``sphereforge.kernels`` picks one at import time.

BVH layout (shared with the numpy twin): ``lo``/``hi`` are node bounds,
``left``/``right`` child ids (-1 for leaves), ``start``/``count`` the slice
of the reordered triangle array ``tris`` (shape (M, 3, 3)) owned by a leaf.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, atan2, INFINITY, M_PI

cnp.import_array()

cdef enum:
    STACK = 128


cdef inline double _dot(double* a, double* b) noexcept nogil:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


cdef inline double _box_dist2(double px, double py, double pz,
                              double* lo, double* hi) noexcept nogil:
    cdef double d = 0.0, t
    t = lo[0] - px
    if t > 0:
        d += t * t
    else:
        t = px - hi[0]
        if t > 0:
            d += t * t
    t = lo[1] - py
    if t > 0:
        d += t * t
    else:
        t = py - hi[1]
        if t > 0:
            d += t * t
    t = lo[2] - pz
    if t > 0:
        d += t * t
    else:
        t = pz - hi[2]
        if t > 0:
            d += t * t
    return d


cdef inline double _closest_on_tri(double* p, double* a, double* b, double* c,
                                   double* out) noexcept nogil:
    """Closest point on triangle abc to p; returns squared distance."""
    cdef double ab[3], ac[3], ap[3], bp[3], cp[3]
    cdef double d1, d2, d3, d4, d5, d6, va, vb, vc, v, w, denom
    cdef int k
    for k in range(3):
        ab[k] = b[k] - a[k]
        ac[k] = c[k] - a[k]
        ap[k] = p[k] - a[k]
    d1 = _dot(ab, ap)
    d2 = _dot(ac, ap)
    if d1 <= 0.0 and d2 <= 0.0:
        for k in range(3):
            out[k] = a[k]
        return _sq(p, out)
    for k in range(3):
        bp[k] = p[k] - b[k]
    d3 = _dot(ab, bp)
    d4 = _dot(ac, bp)
    if d3 >= 0.0 and d4 <= d3:
        for k in range(3):
            out[k] = b[k]
        return _sq(p, out)
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        v = d1 / (d1 - d3)
        for k in range(3):
            out[k] = a[k] + v * ab[k]
        return _sq(p, out)
    for k in range(3):
        cp[k] = p[k] - c[k]
    d5 = _dot(ab, cp)
    d6 = _dot(ac, cp)
    if d6 >= 0.0 and d5 <= d6:
        for k in range(3):
            out[k] = c[k]
        return _sq(p, out)
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        w = d2 / (d2 - d6)
        for k in range(3):
            out[k] = a[k] + w * ac[k]
        return _sq(p, out)
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        w = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        for k in range(3):
            out[k] = b[k] + w * (c[k] - b[k])
        return _sq(p, out)
    denom = va + vb + vc
    if denom <= 0.0:
        # zero-area triangle that slipped through: nearest vertex
        for k in range(3):
            out[k] = a[k]
        return _sq(p, out)
    v = vb / denom
    w = vc / denom
    for k in range(3):
        out[k] = a[k] + ab[k] * v + ac[k] * w
    return _sq(p, out)


cdef inline double _sq(double* p, double* q) noexcept nogil:
    cdef double dx = p[0] - q[0], dy = p[1] - q[1], dz = p[2] - q[2]
    return dx * dx + dy * dy + dz * dz


cdef double _nearest(double* p, double bound2,
                     double[:, ::1] lo, double[:, ::1] hi,
                     int[::1] left, int[::1] right,
                     int[::1] start, int[::1] count,
                     double[:, :, ::1] tris,
                     long* best_tri, double* best_pt) noexcept nogil:
    """Branch-and-bound nearest triangle. Only candidates closer than
    ``bound2`` (squared) are reported; returns the best squared distance."""
    cdef int stack[STACK]
    cdef int sp = 0, node, i, l, r
    cdef double best = bound2, d, dl, dr
    cdef double tmp[3]
    best_tri[0] = -1
    if _box_dist2(p[0], p[1], p[2], &lo[0, 0], &hi[0, 0]) >= best:
        return best
    stack[sp] = 0
    sp += 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if _box_dist2(p[0], p[1], p[2], &lo[node, 0], &hi[node, 0]) >= best:
            continue
        if count[node] > 0:
            for i in range(start[node], start[node] + count[node]):
                d = _closest_on_tri(p, &tris[i, 0, 0], &tris[i, 1, 0], &tris[i, 2, 0], tmp)
                if d < best:
                    best = d
                    best_tri[0] = i
                    best_pt[0] = tmp[0]
                    best_pt[1] = tmp[1]
                    best_pt[2] = tmp[2]
            continue
        l = left[node]
        r = right[node]
        dl = _box_dist2(p[0], p[1], p[2], &lo[l, 0], &hi[l, 0])
        dr = _box_dist2(p[0], p[1], p[2], &lo[r, 0], &hi[r, 0])
        # push the farther child first so the nearer one is popped next
        if dl <= dr:
            if dr < best:
                stack[sp] = r
                sp += 1
            if dl < best:
                stack[sp] = l
                sp += 1
        else:
            if dl < best:
                stack[sp] = l
                sp += 1
            if dr < best:
                stack[sp] = r
                sp += 1
    return best


def closest_points(double[:, ::1] lo, double[:, ::1] hi,
                   int[::1] left, int[::1] right,
                   int[::1] start, int[::1] count,
                   double[:, :, ::1] tris, double[:, ::1] points):
    """Nearest point on the mesh for every query point.

    Returns ``(d2, tri, closest)``: squared distance, index into the
    reordered triangle array, and the closest point itself.
    """
    cdef Py_ssize_t n = points.shape[0], q
    d2_arr = np.empty(n, dtype=np.float64)
    tri_arr = np.empty(n, dtype=np.int64)
    pt_arr = np.empty((n, 3), dtype=np.float64)
    cdef double[::1] d2 = d2_arr
    cdef long[::1] tri = tri_arr
    cdef double[:, ::1] pt = pt_arr
    cdef long bt
    with nogil:
        for q in range(n):
            d2[q] = _nearest(&points[q, 0], INFINITY, lo, hi, left, right,
                             start, count, tris, &bt, &pt[q, 0])
            tri[q] = bt
    return d2_arr, tri_arr, pt_arr


cdef inline bint _ray_box(double* o, double* inv, double* lo, double* hi) noexcept nogil:
    cdef double tmin = 0.0, tmax = INFINITY, t1, t2, tt
    cdef int k
    for k in range(3):
        t1 = (lo[k] - o[k]) * inv[k]
        t2 = (hi[k] - o[k]) * inv[k]
        if t1 > t2:
            tt = t1
            t1 = t2
            t2 = tt
        if t1 > tmin:
            tmin = t1
        if t2 < tmax:
            tmax = t2
        if tmin > tmax:
            return False
    return True


cdef int _ray_crossings(double* o, double* d, double eps,
                        double[:, ::1] lo, double[:, ::1] hi,
                        int[::1] left, int[::1] right,
                        int[::1] start, int[::1] count,
                        double[:, :, ::1] tris, bint* degenerate) noexcept nogil:
    cdef int stack[STACK]
    cdef int sp = 0, node, i, k, hits = 0
    cdef double inv[3], e1[3], e2[3], pv[3], tv[3], qv[3]
    cdef double det, idet, u, v, t
    cdef double* a
    for k in range(3):
        inv[k] = 1.0 / d[k] if d[k] != 0.0 else INFINITY
    degenerate[0] = False
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if not _ray_box(o, inv, &lo[node, 0], &hi[node, 0]):
            continue
        if count[node] == 0:
            stack[sp] = left[node]
            stack[sp + 1] = right[node]
            sp += 2
            continue
        for i in range(start[node], start[node] + count[node]):
            a = &tris[i, 0, 0]
            for k in range(3):
                e1[k] = tris[i, 1, k] - a[k]
                e2[k] = tris[i, 2, k] - a[k]
            pv[0] = d[1] * e2[2] - d[2] * e2[1]
            pv[1] = d[2] * e2[0] - d[0] * e2[2]
            pv[2] = d[0] * e2[1] - d[1] * e2[0]
            det = _dot(e1, pv)
            if det == 0.0:
                continue
            idet = 1.0 / det
            for k in range(3):
                tv[k] = o[k] - a[k]
            u = _dot(tv, pv) * idet
            if u < -eps or u > 1.0 + eps:
                continue
            qv[0] = tv[1] * e1[2] - tv[2] * e1[1]
            qv[1] = tv[2] * e1[0] - tv[0] * e1[2]
            qv[2] = tv[0] * e1[1] - tv[1] * e1[0]
            v = _dot(d, qv) * idet
            if v < -eps or u + v > 1.0 + eps:
                continue
            t = _dot(e2, qv) * idet
            if t < -eps:
                continue
            if t <= eps or u <= eps or v <= eps or u + v >= 1.0 - eps:
                degenerate[0] = True
            if t > 0.0:
                hits += 1
    return hits


def ray_parity(double[:, ::1] lo, double[:, ::1] hi,
               int[::1] left, int[::1] right,
               int[::1] start, int[::1] count,
               double[:, :, ::1] tris,
               double[:, ::1] origins, double[:, ::1] dirs, double eps=1e-9):
    """Count forward crossings of each ray; flag rays that graze an edge,
    a vertex, or start on the surface."""
    cdef Py_ssize_t n = origins.shape[0], q
    cnt_arr = np.empty(n, dtype=np.int64)
    deg_arr = np.zeros(n, dtype=np.bool_)
    cdef long[::1] cnt = cnt_arr
    cdef cnp.npy_bool[::1] deg = deg_arr
    cdef bint dflag
    with nogil:
        for q in range(n):
            cnt[q] = _ray_crossings(&origins[q, 0], &dirs[q, 0], eps, lo, hi,
                                    left, right, start, count, tris, &dflag)
            deg[q] = dflag
    return cnt_arr, deg_arr


def winding_numbers(double[:, :, ::1] tris, double[:, ::1] points):
    """Generalised winding number of each point (solid-angle sum / 4 pi)."""
    cdef Py_ssize_t n = points.shape[0], m = tris.shape[0], q, t, k
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double a[3]
    cdef double b[3]
    cdef double c[3]
    cdef double la, lb, lc, det, den, total
    with nogil:
        for q in range(n):
            total = 0.0
            for t in range(m):
                for k in range(3):
                    a[k] = tris[t, 0, k] - points[q, k]
                    b[k] = tris[t, 1, k] - points[q, k]
                    c[k] = tris[t, 2, k] - points[q, k]
                la = sqrt(_dot(a, a))
                lb = sqrt(_dot(b, b))
                lc = sqrt(_dot(c, c))
                det = (a[0] * (b[1] * c[2] - b[2] * c[1])
                       - a[1] * (b[0] * c[2] - b[2] * c[0])
                       + a[2] * (b[0] * c[1] - b[1] * c[0]))
                den = la * lb * lc + _dot(a, b) * lc + _dot(a, c) * lb + _dot(b, c) * la
                total += 2.0 * atan2(det, den)
            out[q] = total / (4.0 * M_PI)
    return out_arr


# ---------------------------------------------------------------------------
# obstacle queries (bench)

cdef inline bint _tri_box_overlap(double* v0, double* v1, double* v2, double* h) noexcept nogil:
    """Akenine-Moller SAT; vertices already in the box frame, box centred at 0."""
    cdef double e[3][3]
    cdef double* vs[3]
    cdef double ax[3], n[3]
    cdef double p0, p1, p2, mn, mx, r
    cdef int i, j, k
    vs[0] = v0
    vs[1] = v1
    vs[2] = v2
    for k in range(3):
        mn = v0[k]
        mx = v0[k]
        if v1[k] < mn: mn = v1[k]
        if v1[k] > mx: mx = v1[k]
        if v2[k] < mn: mn = v2[k]
        if v2[k] > mx: mx = v2[k]
        if mn > h[k] or mx < -h[k]:
            return False
    for k in range(3):
        e[0][k] = v1[k] - v0[k]
        e[1][k] = v2[k] - v1[k]
        e[2][k] = v0[k] - v2[k]
    n[0] = e[0][1] * e[1][2] - e[0][2] * e[1][1]
    n[1] = e[0][2] * e[1][0] - e[0][0] * e[1][2]
    n[2] = e[0][0] * e[1][1] - e[0][1] * e[1][0]
    r = h[0] * fabs(n[0]) + h[1] * fabs(n[1]) + h[2] * fabs(n[2])
    p0 = _dot(n, v0)
    if fabs(p0) > r:
        return False
    for i in range(3):
        for j in range(3):
            # axis = e_i x unit_j
            if j == 0:
                ax[0] = 0.0
                ax[1] = e[i][2]
                ax[2] = -e[i][1]
            elif j == 1:
                ax[0] = -e[i][2]
                ax[1] = 0.0
                ax[2] = e[i][0]
            else:
                ax[0] = e[i][1]
                ax[1] = -e[i][0]
                ax[2] = 0.0
            p0 = _dot(ax, v0)
            p1 = _dot(ax, v1)
            p2 = _dot(ax, v2)
            mn = p0
            mx = p0
            if p1 < mn: mn = p1
            if p1 > mx: mx = p1
            if p2 < mn: mn = p2
            if p2 > mx: mx = p2
            r = h[0] * fabs(ax[0]) + h[1] * fabs(ax[1]) + h[2] * fabs(ax[2])
            if mn > r or mx < -r:
                return False
    return True


cdef inline double _seg_seg_dist2(double* p1, double* q1, double* p2, double* q2) noexcept nogil:
    """Squared distance between segments p1q1 and p2q2 (Ericson)."""
    cdef double d1[3], d2[3], r[3], c1[3], c2[3]
    cdef double a, e, f, c, b, denom, s, t
    cdef int k
    for k in range(3):
        d1[k] = q1[k] - p1[k]
        d2[k] = q2[k] - p2[k]
        r[k] = p1[k] - p2[k]
    a = _dot(d1, d1)
    e = _dot(d2, d2)
    f = _dot(d2, r)
    if a <= 1e-300 and e <= 1e-300:
        return _sq(p1, p2)
    if a <= 1e-300:
        s = 0.0
        t = f / e
        t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    else:
        c = _dot(d1, r)
        if e <= 1e-300:
            t = 0.0
            s = -c / a
            s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
        else:
            b = _dot(d1, d2)
            denom = a * e - b * b
            if denom != 0.0:
                s = (b * f - c * e) / denom
                s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
            else:
                s = 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = -c / a
                s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
            elif t > 1.0:
                t = 1.0
                s = (b - c) / a
                s = 0.0 if s < 0.0 else (1.0 if s > 1.0 else s)
    for k in range(3):
        c1[k] = p1[k] + d1[k] * s
        c2[k] = p2[k] + d2[k] * t
    return _sq(c1, c2)


cdef inline double _point_box_dist2(double* p, double* h) noexcept nogil:
    cdef double d = 0.0, t
    cdef int k
    for k in range(3):
        t = fabs(p[k]) - h[k]
        if t > 0.0:
            d += t * t
    return d


cdef double _tri_box_dist2(double* v0, double* v1, double* v2, double* h) noexcept nogil:
    """Squared distance between a triangle and a centred box (box frame)."""
    cdef double corners[8][3]
    cdef double* tv[3]
    cdef double best, d, tmp[3]
    cdef int i, j, k, a, b
    if _tri_box_overlap(v0, v1, v2, h):
        return 0.0
    tv[0] = v0
    tv[1] = v1
    tv[2] = v2
    best = INFINITY
    for i in range(3):
        d = _point_box_dist2(tv[i], h)
        if d < best:
            best = d
    for i in range(8):
        corners[i][0] = h[0] if (i & 1) else -h[0]
        corners[i][1] = h[1] if (i & 2) else -h[1]
        corners[i][2] = h[2] if (i & 4) else -h[2]
        d = _closest_on_tri(corners[i], v0, v1, v2, tmp)
        if d < best:
            best = d
    for i in range(8):
        for k in range(3):
            j = i | (1 << k)
            if j == i:
                continue
            for a in range(3):
                b = (a + 1) % 3
                d = _seg_seg_dist2(corners[i], corners[j], tv[a], tv[b])
                if d < best:
                    best = d
    return best


cdef inline void _to_box(double* v, double* c, double* m, double* out) noexcept nogil:
    """out = m @ (v - c) with m row-major 3x3."""
    cdef double x = v[0] - c[0], y = v[1] - c[1], z = v[2] - c[2]
    out[0] = m[0] * x + m[1] * y + m[2] * z
    out[1] = m[3] * x + m[4] * y + m[5] * z
    out[2] = m[6] * x + m[7] * y + m[8] * z


cdef inline double _aabb_aabb_dist2(double* lo1, double* hi1, double* lo2, double* hi2) noexcept nogil:
    cdef double d = 0.0, t
    cdef int k
    for k in range(3):
        t = lo2[k] - hi1[k]
        if t > 0.0:
            d += t * t
        else:
            t = lo1[k] - hi2[k]
            if t > 0.0:
                d += t * t
    return d


cdef inline double _node_box_frame_dist2(double* nlo, double* nhi, double* c, double* m,
                                        double* h) noexcept nogil:
    """Squared distance between the OBB and the node box re-boxed in the
    OBB frame; a lower bound on the true node-to-OBB distance."""
    cdef double nc[3], nh[3], pc, pr, t, d = 0.0
    cdef int k
    for k in range(3):
        nc[k] = 0.5 * (nlo[k] + nhi[k]) - c[k]
        nh[k] = 0.5 * (nhi[k] - nlo[k])
    for k in range(3):
        pc = m[3 * k] * nc[0] + m[3 * k + 1] * nc[1] + m[3 * k + 2] * nc[2]
        pr = fabs(m[3 * k]) * nh[0] + fabs(m[3 * k + 1]) * nh[1] + fabs(m[3 * k + 2]) * nh[2]
        t = fabs(pc) - pr - h[k]
        if t > 0.0:
            d += t * t
    return d


cdef inline double _node_obb_bound(double* nlo, double* nhi, double* blo, double* bhi,
                                   double* c, double* m, double* h) noexcept nogil:
    cdef double a = _aabb_aabb_dist2(nlo, nhi, blo, bhi)
    cdef double b = _node_box_frame_dist2(nlo, nhi, c, m, h)
    return a if a > b else b


cdef inline double _tri_aabb_box_dist2(double* a, double* b, double* cc, double* h) noexcept nogil:
    """Squared distance from the centred box to the triangle's bounding box
    (box frame); a lower bound on the triangle-box distance."""
    cdef double mn, mx, t, d = 0.0
    cdef int k
    for k in range(3):
        mn = a[k]
        mx = a[k]
        if b[k] < mn: mn = b[k]
        if b[k] > mx: mx = b[k]
        if cc[k] < mn: mn = cc[k]
        if cc[k] > mx: mx = cc[k]
        t = mn - h[k]
        if t <= 0.0:
            t = -h[k] - mx
        if t > 0.0:
            d += t * t
    return d


cdef double _mesh_box_dist2(double* c, double* m, double* h, double bound2,
                            double[:, ::1] lo, double[:, ::1] hi,
                            int[::1] left, int[::1] right,
                            int[::1] start, int[::1] count,
                            double[:, :, ::1] tris) noexcept nogil:
    """Squared distance from mesh to OBB (centre c, link->box rotation m,
    half extents h) pruned at ``bound2``. Returns 0 on overlap."""
    cdef int stack[STACK]
    cdef int sp, node, i, k, l, r
    cdef double blo[3], bhi[3], ext, best = bound2, d, dl, dr
    cdef double a[3], b[3], cc[3]
    for k in range(3):
        # m rows are box axes in link frame; extent along link axis k
        ext = fabs(m[k]) * h[0] + fabs(m[3 + k]) * h[1] + fabs(m[6 + k]) * h[2]
        blo[k] = c[k] - ext
        bhi[k] = c[k] + ext
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if _node_obb_bound(&lo[node, 0], &hi[node, 0], blo, bhi, c, m, h) >= best:
            continue
        if count[node] > 0:
            for i in range(start[node], start[node] + count[node]):
                _to_box(&tris[i, 0, 0], c, m, a)
                _to_box(&tris[i, 1, 0], c, m, b)
                _to_box(&tris[i, 2, 0], c, m, cc)
                if _tri_aabb_box_dist2(a, b, cc, h) >= best:
                    continue
                d = _tri_box_dist2(a, b, cc, h)
                if d < best:
                    best = d
                    if best == 0.0:
                        return 0.0
            continue
        l = left[node]
        r = right[node]
        dl = _node_obb_bound(&lo[l, 0], &hi[l, 0], blo, bhi, c, m, h)
        dr = _node_obb_bound(&lo[r, 0], &hi[r, 0], blo, bhi, c, m, h)
        if dl <= dr:
            if dr < best:
                stack[sp] = r
                sp += 1
            if dl < best:
                stack[sp] = l
                sp += 1
        else:
            if dl < best:
                stack[sp] = l
                sp += 1
            if dr < best:
                stack[sp] = r
                sp += 1
    return best


cdef bint _mesh_box_overlap(double* c, double* m, double* h,
                            double[:, ::1] lo, double[:, ::1] hi,
                            int[::1] left, int[::1] right,
                            int[::1] start, int[::1] count,
                            double[:, :, ::1] tris) noexcept nogil:
    cdef int stack[STACK]
    cdef int sp, node, i, k
    cdef double blo[3], bhi[3], ext
    cdef double a[3], b[3], cc[3]
    for k in range(3):
        ext = fabs(m[k]) * h[0] + fabs(m[3 + k]) * h[1] + fabs(m[6 + k]) * h[2]
        blo[k] = c[k] - ext
        bhi[k] = c[k] + ext
    stack[0] = 0
    sp = 1
    while sp > 0:
        sp -= 1
        node = stack[sp]
        if _aabb_aabb_dist2(&lo[node, 0], &hi[node, 0], blo, bhi) > 0.0:
            continue
        if count[node] > 0:
            for i in range(start[node], start[node] + count[node]):
                _to_box(&tris[i, 0, 0], c, m, a)
                _to_box(&tris[i, 1, 0], c, m, b)
                _to_box(&tris[i, 2, 0], c, m, cc)
                if _tri_box_overlap(a, b, cc, h):
                    return True
            continue
        stack[sp] = left[node]
        stack[sp + 1] = right[node]
        sp += 2
    return False


cdef double[3][3] _PROBE_DIRS
_PROBE_DIRS[0][:] = [0.5773502691896257, 0.5773502691896258, 0.5773502691896257]
_PROBE_DIRS[1][:] = [-0.2672612419124244, 0.8017837257372732, 0.5345224838248488]
_PROBE_DIRS[2][:] = [0.6963106238227914, -0.1740776559556979, -0.6963106238227914]


cdef bint _inside(double* p, double[:, ::1] lo, double[:, ::1] hi,
                  int[::1] left, int[::1] right,
                  int[::1] start, int[::1] count,
                  double[:, :, ::1] tris) noexcept nogil:
    """Parity test with fixed probe directions; a probe that grazes an
    edge is replaced by the next one."""
    cdef int k, n
    cdef bint deg
    if (p[0] < lo[0, 0] or p[1] < lo[0, 1] or p[2] < lo[0, 2] or
            p[0] > hi[0, 0] or p[1] > hi[0, 1] or p[2] > hi[0, 2]):
        return False
    for k in range(3):
        n = _ray_crossings(p, _PROBE_DIRS[k], 1e-9, lo, hi, left, right,
                           start, count, tris, &deg)
        if not deg:
            return n % 2 == 1
    return n % 2 == 1


cdef inline void _link_local(double* p, double[:, ::1] rot, double[::1] trans, double* out) noexcept nogil:
    """out = rot^T (p - trans)."""
    cdef double x = p[0] - trans[0], y = p[1] - trans[1], z = p[2] - trans[2]
    out[0] = rot[0, 0] * x + rot[1, 0] * y + rot[2, 0] * z
    out[1] = rot[0, 1] * x + rot[1, 1] * y + rot[2, 1] * z
    out[2] = rot[0, 2] * x + rot[1, 2] * y + rot[2, 2] * z


cdef inline void _box_in_link(double[:, ::1] rot, double[:, ::1] brot, Py_ssize_t b_off,
                              double* m) noexcept nogil:
    """m = (rot^T @ brot)^T = brot^T @ rot : link frame -> box frame (row-major)."""
    cdef int i, j
    for i in range(3):
        for j in range(3):
            m[3 * i + j] = (brot[b_off + 0, i] * rot[0, j] +
                            brot[b_off + 1, i] * rot[1, j] +
                            brot[b_off + 2, i] * rot[2, j])


def mesh_env_collide(double[:, ::1] lo, double[:, ::1] hi,
                     int[::1] left, int[::1] right,
                     int[::1] start, int[::1] count,
                     double[:, :, ::1] tris, bint solid,
                     double[:, ::1] rot, double[::1] trans,
                     double[:, ::1] box_c, double[:, ::1] box_rot, double[:, ::1] box_h,
                     double[:, ::1] sph_c, double[::1] sph_r):
    """True when the posed mesh touches any obstacle.

    ``box_rot`` stacks the (3, 3) box rotations row-wise, shape (3B, 3).
    With ``solid`` the mesh is treated as a closed solid: obstacles fully
    inside it, or a mesh fully inside an obstacle, also count.
    """
    cdef Py_ssize_t b, s
    cdef double c[3], m[9], h[3], v[3], bt_pt[3], d2
    cdef long bt
    cdef int k
    for b in range(box_c.shape[0]):
        _link_local(&box_c[b, 0], rot, trans, c)
        _box_in_link(rot, box_rot, 3 * b, m)
        for k in range(3):
            h[k] = box_h[b, k]
        if _mesh_box_overlap(c, m, h, lo, hi, left, right, start, count, tris):
            return True
        if solid:
            _to_box(&tris[0, 0, 0], c, m, v)
            if fabs(v[0]) <= h[0] and fabs(v[1]) <= h[1] and fabs(v[2]) <= h[2]:
                return True
            if _inside(c, lo, hi, left, right, start, count, tris):
                return True
    for s in range(sph_c.shape[0]):
        _link_local(&sph_c[s, 0], rot, trans, c)
        d2 = _nearest(c, sph_r[s] * sph_r[s] * (1.0 + 1e-12) + 1e-300, lo, hi,
                      left, right, start, count, tris, &bt, bt_pt)
        if bt >= 0:
            return True
        if solid:
            if _sq(&tris[0, 0, 0], c) <= sph_r[s] * sph_r[s]:
                return True
            if _inside(c, lo, hi, left, right, start, count, tris):
                return True
    return False


def mesh_env_distance(double[:, ::1] lo, double[:, ::1] hi,
                      int[::1] left, int[::1] right,
                      int[::1] start, int[::1] count,
                      double[:, :, ::1] tris, bint solid,
                      double[:, ::1] rot, double[::1] trans,
                      double[:, ::1] box_c, double[:, ::1] box_rot, double[:, ::1] box_h,
                      double[:, ::1] sph_c, double[::1] sph_r):
    """Smallest separation between the posed mesh and any obstacle; 0 on
    contact. ``inf`` for an empty environment."""
    cdef Py_ssize_t b, s
    cdef double c[3], m[9], h[3], v[3], bt_pt[3], d2, best = INFINITY, d, bound
    cdef long bt
    cdef int k
    for b in range(box_c.shape[0]):
        _link_local(&box_c[b, 0], rot, trans, c)
        _box_in_link(rot, box_rot, 3 * b, m)
        for k in range(3):
            h[k] = box_h[b, k]
        d2 = _mesh_box_dist2(c, m, h, best * best, lo, hi, left, right,
                             start, count, tris)
        if d2 == 0.0:
            return 0.0
        if solid:
            _to_box(&tris[0, 0, 0], c, m, v)
            if fabs(v[0]) <= h[0] and fabs(v[1]) <= h[1] and fabs(v[2]) <= h[2]:
                return 0.0
            if _inside(c, lo, hi, left, right, start, count, tris):
                return 0.0
        d = sqrt(d2)
        if d < best:
            best = d
    for s in range(sph_c.shape[0]):
        _link_local(&sph_c[s, 0], rot, trans, c)
        bound = best + sph_r[s]
        if solid and _inside(c, lo, hi, left, right, start, count, tris):
            return 0.0
        d2 = _nearest(c, bound * bound, lo, hi, left, right, start, count,
                      tris, &bt, bt_pt)
        if bt < 0:
            continue
        d = sqrt(d2) - sph_r[s]
        if d <= 0.0:
            return 0.0
        if d < best:
            best = d
    return best


cdef inline double _signed_point_box(double* p, double* h) noexcept nogil:
    cdef double out2 = 0.0, inner = INFINITY, t
    cdef bint outside = False
    cdef int k
    for k in range(3):
        t = fabs(p[k]) - h[k]
        if t > 0.0:
            out2 += t * t
            outside = True
        elif -t < inner:
            inner = -t
    if outside:
        return sqrt(out2)
    return -inner


def spheres_env_collide(double[:, ::1] centers, double[::1] radii,
                        double[:, ::1] rot, double[::1] trans,
                        double[:, ::1] box_c, double[:, ::1] box_rot, double[:, ::1] box_h,
                        double[:, ::1] sph_c, double[::1] sph_r):
    """True when any posed sphere touches any obstacle."""
    cdef Py_ssize_t i, b, s
    cdef double w[3], p[3], h[3], x, y, z, rs
    cdef int k
    for i in range(centers.shape[0]):
        for k in range(3):
            w[k] = (rot[k, 0] * centers[i, 0] + rot[k, 1] * centers[i, 1] +
                    rot[k, 2] * centers[i, 2] + trans[k])
        for s in range(sph_c.shape[0]):
            x = w[0] - sph_c[s, 0]
            y = w[1] - sph_c[s, 1]
            z = w[2] - sph_c[s, 2]
            rs = radii[i] + sph_r[s]
            if x * x + y * y + z * z <= rs * rs:
                return True
        for b in range(box_c.shape[0]):
            x = w[0] - box_c[b, 0]
            y = w[1] - box_c[b, 1]
            z = w[2] - box_c[b, 2]
            for k in range(3):
                p[k] = box_rot[3 * b, k] * x + box_rot[3 * b + 1, k] * y + box_rot[3 * b + 2, k] * z
                h[k] = box_h[b, k]
            if _point_box_dist2(p, h) <= radii[i] * radii[i]:
                return True
    return False


def spheres_env_distance(double[:, ::1] centers, double[::1] radii,
                         double[:, ::1] rot, double[::1] trans,
                         double[:, ::1] box_c, double[:, ::1] box_rot, double[:, ::1] box_h,
                         double[:, ::1] sph_c, double[::1] sph_r):
    """Smallest signed separation between posed spheres and obstacles;
    negative values are penetration depths."""
    cdef Py_ssize_t i, b, s
    cdef double w[3], p[3], h[3], x, y, z, d, best = INFINITY
    cdef int k
    for i in range(centers.shape[0]):
        for k in range(3):
            w[k] = (rot[k, 0] * centers[i, 0] + rot[k, 1] * centers[i, 1] +
                    rot[k, 2] * centers[i, 2] + trans[k])
        for s in range(sph_c.shape[0]):
            x = w[0] - sph_c[s, 0]
            y = w[1] - sph_c[s, 1]
            z = w[2] - sph_c[s, 2]
            d = sqrt(x * x + y * y + z * z) - radii[i] - sph_r[s]
            if d < best:
                best = d
        for b in range(box_c.shape[0]):
            x = w[0] - box_c[b, 0]
            y = w[1] - box_c[b, 1]
            z = w[2] - box_c[b, 2]
            for k in range(3):
                p[k] = box_rot[3 * b, k] * x + box_rot[3 * b + 1, k] * y + box_rot[3 * b + 2, k] * z
                h[k] = box_h[b, k]
            d = _signed_point_box(p, h) - radii[i]
            if d < best:
                best = d
    return best
