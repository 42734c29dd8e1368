"""Procedural watertight meshes (outward winding) used for primitives,
demo assets and tests."""

import numpy as np

from .mesh import TriangleMesh


def box(extents=(1.0, 1.0, 1.0), center=(0.0, 0.0, 0.0)):
    """Axis-aligned box with 12 triangles."""
    h = np.asarray(extents, dtype=float) / 2.0
    c = np.asarray(center, dtype=float)
    return box_bounds(c - h, c + h)


def box_bounds(lo, hi):
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    v = np.array([[hi[0] if i & 1 else lo[0], hi[1] if i & 2 else lo[1], hi[2] if i & 4 else lo[2]]
                  for i in range(8)])
    f = [
        [0, 2, 1], [1, 2, 3],  # z-
        [4, 5, 6], [5, 7, 6],  # z+
        [0, 1, 4], [1, 5, 4],  # y-
        [2, 6, 3], [3, 6, 7],  # y+
        [0, 4, 2], [2, 4, 6],  # x-
        [1, 3, 5], [3, 7, 5],  # x+
    ]
    return TriangleMesh(v, f)


def icosphere(subdivisions=3, radius=1.0, center=(0.0, 0.0, 0.0)):
    """Subdivided icosahedron; ``20 * 4**subdivisions`` faces."""
    t = (1.0 + 5 ** 0.5) / 2.0
    v = [[-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
         [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
         [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]]
    f = [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
         [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
         [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
         [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]]
    verts = np.array(v, dtype=float)
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = np.array(f)
    for _ in range(subdivisions):
        edges = np.sort(faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        uniq, inv = np.unique(edges, axis=0, return_inverse=True)
        inv = inv.reshape(-1, 3) + len(verts)
        mids = verts[uniq].mean(axis=1)
        mids /= np.linalg.norm(mids, axis=1, keepdims=True)
        verts = np.vstack([verts, mids])
        a, b, c = faces.T
        ab, bc, ca = inv.T
        faces = np.concatenate([
            np.stack([a, ab, ca], 1), np.stack([b, bc, ab], 1),
            np.stack([c, ca, bc], 1), np.stack([ab, bc, ca], 1),
        ])
    return TriangleMesh(verts * radius + np.asarray(center, dtype=float), faces)


def _revolve(profile, segments):
    """Closed surface of revolution about z from a profile of (r, z) pairs
    running bottom to top; end points with r == 0 become poles."""
    profile = np.asarray(profile, dtype=float)
    theta = np.linspace(0.0, 2 * np.pi, segments, endpoint=False)
    rings = profile[1:-1]
    verts = [[0.0, 0.0, profile[0, 1]]]
    for r, z in rings:
        verts.extend(np.stack([r * np.cos(theta), r * np.sin(theta), np.full(segments, z)], 1))
    verts.append([0.0, 0.0, profile[-1, 1]])
    verts = np.asarray(verts)
    top = len(verts) - 1
    faces = []
    j = np.arange(segments)
    jn = (j + 1) % segments
    first = 1
    faces.extend(np.stack([np.zeros(segments, int), first + jn, first + j], 1))
    for k in range(len(rings) - 1):
        a = 1 + k * segments
        b = a + segments
        faces.extend(np.stack([a + j, a + jn, b + jn], 1))
        faces.extend(np.stack([a + j, b + jn, b + j], 1))
    last = 1 + (len(rings) - 1) * segments
    faces.extend(np.stack([np.full(segments, top), last + j, last + jn], 1))
    return TriangleMesh(verts, np.asarray(faces))


def capsule(radius=0.2, length=1.0, segments=32, cap_rings=8, body_rings=1):
    """Capsule along z: cylinder of ``length`` between hemispherical caps."""
    half = length / 2.0
    phi = np.linspace(-np.pi / 2, 0.0, cap_rings + 1)
    bottom = np.stack([radius * np.cos(phi), -half + radius * np.sin(phi)], 1)
    body = np.stack([np.full(body_rings - 1, radius), np.linspace(-half, half, body_rings + 1)[1:-1]], 1)
    top = np.stack([radius * np.cos(phi[::-1]), half - radius * np.sin(phi[::-1])], 1)
    profile = np.vstack([bottom, body, top])
    profile[0, 0] = profile[-1, 0] = 0.0
    return _revolve(profile, segments)


def cylinder(radius=0.5, length=1.0, segments=32):
    """Cylinder along z centred at the origin, fan-capped."""
    h = length / 2.0
    profile = [[0.0, -h], [radius, -h], [radius, h], [0.0, h]]
    return _revolve(profile, segments)


def torus(major=0.7, minor=0.25, n_major=32, n_minor=16):
    u = np.linspace(0, 2 * np.pi, n_major, endpoint=False)
    w = np.linspace(0, 2 * np.pi, n_minor, endpoint=False)
    uu, ww = np.meshgrid(u, w, indexing="ij")
    x = (major + minor * np.cos(ww)) * np.cos(uu)
    y = (major + minor * np.cos(ww)) * np.sin(uu)
    z = minor * np.sin(ww)
    verts = np.stack([x, y, z], -1).reshape(-1, 3)
    i = np.arange(n_major)[:, None]
    j = np.arange(n_minor)[None, :]
    a = i * n_minor + j
    b = ((i + 1) % n_major) * n_minor + j
    c = ((i + 1) % n_major) * n_minor + (j + 1) % n_minor
    d = i * n_minor + (j + 1) % n_minor
    faces = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3), np.stack([a, c, d], -1).reshape(-1, 3)])
    return TriangleMesh(verts, faces)


def plate(extents=(1.0, 1.0, 0.1)):
    return box_bounds((0.0, 0.0, 0.0), extents)


def unit_cube():
    """The cube [0, 1]^3."""
    return box_bounds((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))
