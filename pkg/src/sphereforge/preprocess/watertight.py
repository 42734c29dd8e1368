"""Watertight remeshing through a sampled signed distance field.

The unsigned distance to the input comes from the BVH, the sign from five
ray-parity votes (split votes fall back to the winding number), and the surface from marching
tetrahedra on the grid's Kuhn triangulation. Every cube is split into six
tetrahedra around its main diagonal, so neighbouring cubes agree on shared
faces and the extracted surface is a closed 2-manifold by construction.
"""

import numpy as np
from scipy.ndimage import binary_dilation, label

from ..errors import EmptyResult
from ..geometry.bvh import inside_fraction, winding_number
from ..geometry.mesh import TriangleMesh, split_components

# cube corner k sits at offset (k & 1, k >> 1 & 1, k >> 2 & 1)
_CORNERS = np.array([[k & 1, (k >> 1) & 1, (k >> 2) & 1] for k in range(8)])

# Kuhn split: each tetrahedron walks 0 -> 7 flipping one axis at a time
_TETS = np.array([
    [0, 1, 3, 7], [0, 1, 5, 7], [0, 2, 3, 7],
    [0, 2, 6, 7], [0, 4, 5, 7], [0, 4, 6, 7],
])

# interpolated points never sit on a grid vertex, keeping faces non-degenerate
_T_CLAMP = 1e-3


def _case_table():
    """For each 4-bit inside mask, the triangles as triples of tet edges."""
    table = {}
    for mask in range(1, 15):
        ins = [i for i in range(4) if mask >> i & 1]
        out = [i for i in range(4) if not mask >> i & 1]
        if len(ins) == 1:
            tris = [[(ins[0], o) for o in out]]
        elif len(ins) == 3:
            tris = [[(i, out[0]) for i in ins]]
        else:
            a, b = ins
            c, d = out
            quad = [(a, c), (a, d), (b, d), (b, c)]
            tris = [[quad[0], quad[1], quad[2]], [quad[0], quad[2], quad[3]]]
        table[mask] = tris
    return table


_CASES = _case_table()


def grid_cell_size(mesh, leaves):
    """Cell edge so the AABB holds roughly ``8 * leaves`` cells.

    Extents thinner than 5 % of the largest one are widened first, which
    keeps flat parts from driving the cell size to zero.
    """
    lo, hi = mesh.bounds
    ext = hi - lo
    big = float(ext.max())
    if not big > 0:
        raise EmptyResult("mesh has zero extent")
    ext = np.maximum(ext, 0.05 * big)
    return float((np.prod(ext) / (8.0 * leaves)) ** (1.0 / 3.0))


def make_watertight(mesh, leaves=1000, seed=0):
    """Closed, outward-oriented surface offset half a cell outside ``mesh``."""
    if not len(mesh.faces):
        raise EmptyResult("mesh has no faces")
    if leaves < 1:
        raise ValueError("leaves must be positive")
    cell = grid_cell_size(mesh, leaves)
    lo, hi = mesh.bounds
    origin = lo - 2.0 * cell
    shape = np.ceil((hi - lo) / cell).astype(np.int64) + 5
    axes = [origin[i] + cell * np.arange(shape[i]) for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)

    dist, _, _ = mesh.bvh.closest(grid)
    # a face repeated over the same corners would cancel its own ray crossing
    signer = _dedupe(mesh)
    bvh = signer.bvh
    share = inside_fraction(bvh, grid, rays=5, seed=seed)
    inside = share > 0.5
    # split votes happen near holes and cracks, where ray parity is a coin
    # toss; the winding number settles them, and their neighbours too since
    # five agreeing votes there can still be wrong
    split = (share > 0) & (share < 1)
    split = binary_dilation(split.reshape(tuple(shape)), iterations=2).reshape(-1)
    split = np.nonzero(split)[0]
    if len(split):
        inside[split] = winding_number(signer, grid[split]) > 0.5
    # pockets the surface seals off from the border are interior even when
    # parity says otherwise (overlapping shells cross an even number of
    # times). An edge between grid neighbours that crosses the surface has
    # an endpoint within half a cell of it, so flooding through points
    # farther away than that never leaves the outside.
    free = (~inside & (dist > 0.5 * cell)).reshape(tuple(shape))
    labels, _ = label(free)
    rim = np.unique(np.concatenate([labels[[0, -1]].ravel(), labels[:, [0, -1]].ravel(),
                                    labels[:, :, [0, -1]].ravel()]))
    sealed = (labels > 0) & ~np.isin(labels, rim)
    inside |= sealed.reshape(-1)
    field = np.where(inside, -dist, dist) - 0.5 * cell
    # the padded border is outside by construction; this caps every surface
    border = np.zeros(tuple(shape), dtype=bool)
    border[[0, -1], :, :] = border[:, [0, -1], :] = border[:, :, [0, -1]] = True
    field[border.reshape(-1)] = np.maximum(field[border.reshape(-1)], cell)
    if not np.any(field < 0):
        raise EmptyResult("no interior found at this grid resolution")

    verts, faces = _march(field, grid, shape)
    if not len(faces):
        raise EmptyResult("isosurface is empty")
    return _drop_specks(TriangleMesh(verts, faces).compact(), 2.0 * cell ** 3)


def _dedupe(mesh):
    key = np.sort(mesh.faces, axis=1)
    _, first = np.unique(key, axis=0, return_index=True)
    if len(first) == len(key):
        return mesh
    return TriangleMesh(mesh.vertices, mesh.faces[np.sort(first)])


def _drop_specks(mesh, min_volume):
    """Remove inward-facing shells and components enclosing less than
    ``min_volume``.

    Inward shells bound cavities, which a collision solid does not need;
    they come from faces that disagree on orientation. Single grid
    vertices whose vote went the wrong way leave tiny bubbles. The largest
    component always survives.
    """
    parts = split_components(mesh)
    if len(parts) == 1:
        return mesh
    signed = np.array([p.volume for p in parts])
    vols = np.abs(signed)
    keep = (signed > 0) & (vols >= min_volume)
    keep[int(np.argmax(vols))] = True
    if keep.all():
        return mesh
    return TriangleMesh.concatenate([p for p, k in zip(parts, keep) if k]).compact()


def _march(field, grid, shape):
    nx, ny, nz = (int(s) for s in shape)
    strides = np.array([ny * nz, nz, 1])
    base = np.stack(np.meshgrid(np.arange(nx - 1), np.arange(ny - 1), np.arange(nz - 1), indexing="ij"), -1)
    base = base.reshape(-1, 3) @ strides
    corner = base[:, None] + (_CORNERS @ strides)[None, :]
    tets = corner[:, _TETS].reshape(-1, 4)

    neg = field[tets] < 0
    mask = neg @ (1 << np.arange(4))
    keep = (mask > 0) & (mask < 15)
    tets, mask = tets[keep], mask[keep]

    corner_a, corner_b = [], []
    for m, tris in _CASES.items():
        sel = tets[mask == m]
        if not len(sel):
            continue
        for tri in tris:
            corner_a.append(np.stack([sel[:, e[0]] for e in tri], 1))
            corner_b.append(np.stack([sel[:, e[1]] for e in tri], 1))
    ia = np.concatenate(corner_a)  # inside end of each edge
    ib = np.concatenate(corner_b)  # outside end

    n = len(field)
    key = (ia * n + ib).reshape(-1)
    uniq, inverse = np.unique(key, return_inverse=True)
    ea, eb = uniq // n, uniq % n
    fa, fb = field[ea], field[eb]
    t = np.clip(fa / (fa - fb), _T_CLAMP, 1.0 - _T_CLAMP)
    verts = grid[ea] + t[:, None] * (grid[eb] - grid[ea])
    faces = inverse.reshape(-1, 3)

    # orient every triangle from the inside corners toward the outside ones
    tri = verts[faces]
    normal = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    outward = grid[ib].mean(axis=1) - grid[ia].mean(axis=1)
    flip = np.einsum("ij,ij->i", normal, outward) < 0
    faces[flip] = faces[flip][:, ::-1]
    return verts, faces
