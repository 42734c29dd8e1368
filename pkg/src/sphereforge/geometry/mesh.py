"""Indexed triangle meshes and topology validation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components


class TriangleMesh:
    """Indexed triangle surface, coordinates in meters.

    Parameters
    ----------
    vertices : (N, 3) array_like
        Vertex positions.
    faces : (M, 3) array_like
        Vertex indices of each triangle, counter-clockwise seen from outside.
    """

    def __init__(self, vertices, faces):
        v = np.array(vertices, dtype=np.float64).reshape(-1, 3)
        f = np.array(faces, dtype=np.int64).reshape(-1, 3)
        if not np.all(np.isfinite(v)):
            raise ValueError("vertex coordinates must be finite")
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise ValueError("face index out of range")
        v.flags.writeable = False
        f.flags.writeable = False
        self.vertices = v
        self.faces = f
        self.dropped_faces = 0
        self._bvh = None

    def __repr__(self):
        return f"TriangleMesh(vertices={len(self.vertices)}, faces={len(self.faces)})"

    def __eq__(self, other):
        if not isinstance(other, TriangleMesh):
            return NotImplemented
        return np.array_equal(self.vertices, other.vertices) and np.array_equal(self.faces, other.faces)

    __hash__ = None

    @property
    def triangles(self):
        """(M, 3, 3) corner coordinates."""
        return self.vertices[self.faces]

    @property
    def face_cross(self):
        t = self.triangles
        return np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])

    @property
    def face_areas(self):
        return 0.5 * np.linalg.norm(self.face_cross, axis=1)

    @property
    def face_normals(self):
        n = self.face_cross
        norm = np.linalg.norm(n, axis=1, keepdims=True)
        norm[norm == 0] = 1.0
        return n / norm

    @property
    def area(self):
        return float(self.face_areas.sum())

    @property
    def volume(self):
        """Signed enclosed volume (divergence theorem); positive when outward."""
        t = self.triangles
        return float(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum() / 6.0)

    @property
    def bounds(self):
        used = self.vertices[np.unique(self.faces)] if len(self.faces) else self.vertices
        return used.min(axis=0), used.max(axis=0)

    @property
    def diagonal(self):
        lo, hi = self.bounds
        return float(np.linalg.norm(hi - lo))

    def edges_unique(self):
        """Sorted undirected edges, shape (E, 2)."""
        e = np.sort(self.faces[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
        return np.unique(e, axis=0)

    def vertex_neighbors(self):
        """CSR adjacency (indptr, indices) of the 1-ring of every vertex."""
        e = self.edges_unique()
        n = len(self.vertices)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        adj = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n)).tocsr()
        adj.sort_indices()
        return adj.indptr, adj.indices

    def transformed(self, matrix):
        """Copy with vertices mapped by a 4x4 homogeneous transform."""
        m = np.asarray(matrix, dtype=float)
        return TriangleMesh(self.vertices @ m[:3, :3].T + m[:3, 3], self.faces)

    def scaled(self, scale):
        return TriangleMesh(self.vertices * np.asarray(scale, dtype=float), self.faces)

    def compact(self):
        """Drop unreferenced vertices, keeping first-use order stable."""
        used, inverse = np.unique(self.faces, return_inverse=True)
        return TriangleMesh(self.vertices[used], inverse.reshape(-1, 3))

    @property
    def bvh(self):
        """Lazily built :class:`~sphereforge.geometry.bvh.MeshBvh`."""
        if self._bvh is None:
            from .bvh import MeshBvh

            self._bvh = MeshBvh(self)
        return self._bvh

    @staticmethod
    def concatenate(meshes):
        verts, faces, off = [], [], 0
        for m in meshes:
            verts.append(m.vertices)
            faces.append(m.faces + off)
            off += len(m.vertices)
        return TriangleMesh(np.concatenate(verts), np.concatenate(faces))


@dataclass(frozen=True)
class MeshReport:
    watertight: bool
    edge_manifold: bool
    consistently_oriented: bool
    boundary_edge_count: int
    non_manifold_edge_count: int
    connected_components: int
    euler_characteristic: int
    face_count: int
    vertex_count: int

    def lines(self):
        return [f"{k}: {str(v).lower() if isinstance(v, bool) else v}" for k, v in self.__dict__.items()]


def validate_mesh(mesh):
    """Half-edge accounting of a mesh's topology. Never raises."""
    f = mesh.faces
    nf = len(f)
    directed = f[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2)
    undirected = np.sort(directed, axis=1)
    if nf:
        edges, inv, counts = np.unique(undirected, axis=0, return_inverse=True, return_counts=True)
        inv = inv.reshape(-1)
    else:
        edges = np.empty((0, 2), dtype=np.int64)
        inv = np.empty(0, dtype=np.int64)
        counts = np.empty(0, dtype=np.int64)
    boundary = int(np.sum(counts == 1))
    non_manifold = int(np.sum(counts > 2))

    # a shared manifold edge is consistent when its two half-edges run opposite ways
    forward = directed[:, 0] < directed[:, 1]
    fwd_count = np.bincount(inv, weights=forward, minlength=len(edges))
    two = counts == 2
    oriented = bool(np.all(fwd_count[two] == 1))

    used = np.unique(f) if nf else np.empty(0, dtype=np.int64)
    if nf:
        n = len(mesh.vertices)
        graph = coo_matrix((np.ones(len(edges)), (edges[:, 0], edges[:, 1])), shape=(n, n))
        _, labels = connected_components(graph, directed=False)
        components = len(np.unique(labels[used]))
    else:
        components = 0
    euler = len(used) - len(edges) + nf
    return MeshReport(
        watertight=boundary == 0 and non_manifold == 0 and oriented,
        edge_manifold=non_manifold == 0,
        consistently_oriented=oriented,
        boundary_edge_count=boundary,
        non_manifold_edge_count=non_manifold,
        connected_components=int(components),
        euler_characteristic=int(euler),
        face_count=int(nf),
        vertex_count=int(len(mesh.vertices)),
    )


def split_components(mesh):
    """Face-connected pieces of a mesh, each compacted."""
    if not len(mesh.faces):
        return []
    n = len(mesh.vertices)
    e = mesh.faces[:, [0, 1, 1, 2]].reshape(-1, 2)
    graph = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    face_label = labels[mesh.faces[:, 0]]
    out = []
    for lab in np.unique(face_label):
        out.append(TriangleMesh(mesh.vertices, mesh.faces[face_label == lab]).compact())
    return out
