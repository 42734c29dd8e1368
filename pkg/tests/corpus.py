"""Twenty broken meshes: holes, flipped and duplicate faces, non-manifold
edges, self-intersections and mixtures of these."""

import numpy as np

from sphereforge.geometry.mesh import TriangleMesh
from sphereforge.geometry.meshio import weld
from sphereforge.geometry.shapes import box, capsule, cylinder, icosphere, torus


def _drop(mesh, idx):
    keep = np.setdiff1d(np.arange(len(mesh.faces)), idx)
    return TriangleMesh(mesh.vertices, mesh.faces[keep]).compact()


def _flip(mesh, idx):
    f = mesh.faces.copy()
    f[idx] = f[idx][:, ::-1]
    return TriangleMesh(mesh.vertices, f)


def _dup(mesh, idx, flipped=False):
    extra = mesh.faces[idx]
    if flipped:
        extra = extra[:, ::-1]
    return TriangleMesh(mesh.vertices, np.vstack([mesh.faces, extra]))


def _union(*meshes):
    return TriangleMesh.concatenate(meshes)


def _welded(mesh):
    v, f = weld(mesh.vertices, mesh.faces, 1e-9)
    return TriangleMesh(v, f)


def _fin(mesh):
    """Extra triangle hanging off an existing edge: a three-face edge."""
    a, b = mesh.faces[0][:2]
    tip = mesh.vertices[a] + 0.5 * (mesh.vertices[b] - mesh.vertices[a]) + np.array([0.0, 0.0, 0.4])
    v = np.vstack([mesh.vertices, tip])
    return TriangleMesh(v, np.vstack([mesh.faces, [[a, b, len(v) - 1]]]))


def _jitter(mesh, scale, seed):
    rng = np.random.default_rng(seed)
    return TriangleMesh(mesh.vertices + rng.normal(scale=scale, size=mesh.vertices.shape), mesh.faces)


def _open_cylinder():
    m = cylinder(0.3, 1.0, 24)
    n = m.face_normals
    return _drop(m, np.nonzero(np.abs(n[:, 2]) > 0.9)[0])


def defect_corpus():
    """List of ``(name, mesh)`` pairs, 20 in total."""
    ico = icosphere(3)
    cube = box((1.0, 1.0, 1.0))
    tor = torus()
    cap = capsule(0.2, 1.0, 32, 8)
    rng = np.random.default_rng(0)
    return [
        ("hole_single", _drop(ico, [0])),
        ("hole_patch", _drop(ico, np.arange(0, 40))),
        ("cube_missing_face", _drop(cube, [0, 1])),
        ("torus_strip_removed", _drop(tor, np.arange(0, 64))),
        ("flipped_some", _flip(ico, np.arange(0, 1280, 7))),
        ("cube_one_flipped", _flip(cube, [3])),
        ("capsule_random_flips", _flip(cap, rng.choice(len(cap.faces), len(cap.faces) // 5, replace=False))),
        ("cube_duplicates", _dup(cube, np.arange(12))),
        ("sphere_duplicates", _dup(ico, np.arange(0, 200))),
        ("duplicate_flipped", _dup(cube, [0, 5, 9], flipped=True)),
        ("cubes_sharing_edge", _welded(_union(box((1, 1, 1)), box((1, 1, 1), (1.0, 1.0, 0.0))))),
        ("cube_with_fin", _fin(cube)),
        ("sphere_with_fin", _fin(ico)),
        ("overlapping_cubes", _union(box((1, 1, 1)), box((1, 1, 1), (0.5, 0.3, 0.2)))),
        ("nested_spheres_crossing", _union(ico, icosphere(2, 0.6, (0.6, 0.0, 0.0)))),
        ("crumpled_torus", _jitter(tor, 0.04, 1)),
        ("single_triangle", TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])),
        ("open_cylinder", _open_cylinder()),
        ("holed_flipped_plate", _flip(_drop(box((1.0, 1.0, 0.1)), [4]), [0, 8])),
        ("capsule_holes_and_dups", _dup(_drop(cap, np.arange(0, 30)), np.arange(100, 140))),
    ]
