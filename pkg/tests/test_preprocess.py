import math
import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from corpus import defect_corpus
from sphereforge.errors import EmptyResult, NotWatertight
from sphereforge.geometry import TriangleMesh, validate_mesh
from sphereforge.geometry.meshio import save_obj
from sphereforge.geometry.shapes import box, box_bounds, icosphere, unit_cube
from sphereforge.preprocess import (
    ProcessConfig,
    grid_cell_size,
    make_watertight,
    process_mesh,
    simplify_qem,
    smooth_manifold,
)

TETRA = TriangleMesh(
    [[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]],
    [[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]],
)


# -- config ------------------------------------------------------------------------------


def test_config_defaults():
    c = ProcessConfig()
    assert (c.manifold_leaves, c.ratio, c.smooth_iterations, c.hc_alpha, c.hc_beta) == (1000, 0.2, 10, 0.1, 0.6)


@pytest.mark.parametrize("kw", [dict(ratio=0), dict(ratio=1.5), dict(manifold_leaves=7),
                                dict(hc_alpha=-0.1), dict(hc_beta=2), dict(smooth_iterations=-1)])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        ProcessConfig(**kw)


# -- watertight remesh ----------------------------------------------------------------------


@pytest.mark.parametrize("name,mesh", defect_corpus(), ids=[n for n, _ in defect_corpus()])
def test_defect_corpus_becomes_watertight(name, mesh):
    t = time.perf_counter()
    out = make_watertight(mesh, 1000)
    assert time.perf_counter() - t < 5.0
    r = validate_mesh(out)
    assert r.watertight
    assert out.volume > 0  # outward orientation


def test_cube_missing_face_volume(cube):
    holed = TriangleMesh(cube.vertices, cube.faces[2:]).compact()
    assert not validate_mesh(holed).watertight
    out = make_watertight(holed, 1000)
    assert validate_mesh(out).watertight
    assert 0.9 <= out.volume <= 1.15


def test_icosphere_remesh_within_two_cells():
    m = icosphere(3)
    out = make_watertight(m, 1000)
    cell = grid_cell_size(m, 1000)
    assert validate_mesh(out).watertight
    assert oracles.hausdorff(out, m, n=2000) <= 2 * cell


def test_disjoint_cubes_stay_disjoint():
    two = TriangleMesh.concatenate([box_bounds((0, 0, 0), (1, 1, 1)), box_bounds((4, 0, 0), (5, 1, 1))])
    out = make_watertight(two, 1000)
    r = validate_mesh(out)
    assert r.watertight and r.connected_components == 2


def test_remesh_errs_outward(shapes):
    from sphereforge.geometry import points_inside

    m = shapes["capsule"]
    out = make_watertight(m, 1000)
    # every original vertex lies inside the offset surface
    assert points_inside(out.bvh, m.vertices).all()


def test_remesh_is_deterministic(cube):
    a = make_watertight(TriangleMesh(cube.vertices, cube.faces[1:]).compact(), 500, seed=4)
    b = make_watertight(TriangleMesh(cube.vertices, cube.faces[1:]).compact(), 500, seed=4)
    assert np.array_equal(a.vertices, b.vertices) and np.array_equal(a.faces, b.faces)


def test_remesh_of_empty_mesh():
    with pytest.raises(EmptyResult):
        make_watertight(TriangleMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=int)), 1000)


def test_cell_size_matches_budget():
    m = box((2.0, 1.0, 0.5))
    cell = grid_cell_size(m, 1000)
    assert 1.0 / cell ** 3 == pytest.approx(8000, rel=1e-9)


# -- simplification ------------------------------------------------------------------------


def test_simplify_identity_at_ratio_one(shapes):
    m = shapes["torus"]
    out = simplify_qem(m, 1.0)
    assert np.array_equal(out.vertices, m.vertices) and np.array_equal(out.faces, m.faces)


def test_simplify_tetrahedron_floor():
    out = simplify_qem(TETRA, 0.5)
    assert np.array_equal(out.faces, TETRA.faces)


def test_simplify_icosphere_fidelity():
    m = icosphere(3)
    assert len(m.faces) == 1280
    out = simplify_qem(m, 0.2)
    assert len(out.faces) <= 256
    assert validate_mesh(out).watertight
    assert oracles.hausdorff(out, m, n=2000) <= 0.02


def test_simplify_rejects_open_mesh():
    with pytest.raises(NotWatertight):
        simplify_qem(TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]]), 0.5)


@settings(max_examples=12, deadline=None)
@given(st.floats(0.05, 1.0), st.sampled_from(["torus", "capsule", "icosphere", "cube"]))
def test_simplify_never_grows_and_stays_closed(ratio, name):
    from conftest import shape_corpus

    m = shape_corpus()[name]
    out = simplify_qem(m, ratio)
    assert len(out.faces) <= len(m.faces)
    assert len(out.faces) <= max(4, math.ceil(ratio * len(m.faces))) or len(out.faces) < len(m.faces)
    assert validate_mesh(out).watertight


def test_planar_collapses_are_free():
    # a subdivided box: every face lies in one of six planes, so any
    # accepted collapse keeps the surface on those planes
    m = _subdivided_cube(6)
    out = simplify_qem(m, 0.3)
    assert len(out.faces) < len(m.faces)
    assert oracles.hausdorff(out, m, n=500) < 1e-9


def _subdivided_cube(n):
    verts, faces = [], []
    index = {}

    def vid(p):
        key = tuple(np.round(p, 12))
        if key not in index:
            index[key] = len(verts)
            verts.append(p)
        return index[key]

    for axis in range(3):
        for side in (0.0, 1.0):
            for i in range(n):
                for j in range(n):
                    quad = []
                    for di, dj in ((0, 0), (1, 0), (1, 1), (0, 1)):
                        p = np.zeros(3)
                        p[axis] = side
                        p[(axis + 1) % 3] = (i + di) / n
                        p[(axis + 2) % 3] = (j + dj) / n
                        quad.append(vid(p))
                    a, b, c, d = quad
                    tri = [[a, b, c], [a, c, d]]
                    if side == 0.0:
                        tri = [t[::-1] for t in tri]
                    faces.extend(tri)
    m = TriangleMesh(np.array(verts), np.array(faces))
    assert validate_mesh(m).watertight and m.volume == pytest.approx(1.0)
    return m


# -- smoothing -------------------------------------------------------------------------------------


def test_smooth_zero_iterations_identity(shapes):
    m = shapes["capsule"]
    assert smooth_manifold(m, 0) is m


def test_smooth_alpha_beta_one_cancels(shapes):
    m = shapes["torus"]
    out = smooth_manifold(m, 7, alpha=1.0, beta=1.0)
    assert np.max(np.abs(out.vertices - m.vertices)) <= 1e-12
    assert np.array_equal(out.faces, m.faces)


def test_smooth_reduces_radial_noise():
    m = icosphere(3)
    rng = np.random.default_rng(0)
    noisy = TriangleMesh(m.vertices * (1 + rng.uniform(-0.02, 0.02, len(m.vertices)))[:, None], m.faces)
    out = smooth_manifold(noisy, 10)

    def rms(mesh):
        return np.sqrt(np.mean((np.linalg.norm(mesh.vertices, axis=1) - 1) ** 2))

    assert rms(out) < rms(noisy)
    assert len(out.vertices) == len(noisy.vertices)


def test_smooth_matches_reference_update():
    m = icosphere(1)
    rng = np.random.default_rng(1)
    v = m.vertices + rng.normal(scale=0.01, size=m.vertices.shape)
    noisy = TriangleMesh(v, m.faces)
    nbrs = [set() for _ in v]
    for a, b, c in m.faces:
        nbrs[a] |= {b, c}
        nbrs[b] |= {a, c}
        nbrs[c] |= {a, b}
    o = v.copy()
    p = v.copy()
    alpha, beta = 0.1, 0.6
    for _ in range(3):
        q = np.array([p[list(n)].mean(0) for n in nbrs])
        b = q - (alpha * o + (1 - alpha) * p)
        p = np.array([q[i] - (beta * b[i] + (1 - beta) * b[list(nbrs[i])].mean(0)) for i in range(len(p))])
    out = smooth_manifold(noisy, 3, alpha, beta)
    assert np.allclose(out.vertices, p, atol=1e-12)


def test_smooth_rejects_open_mesh():
    with pytest.raises(NotWatertight):
        smooth_manifold(TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]]), 2)


# -- full pipeline -----------------------------------------------------------------------------------


def test_pipeline_on_box(cube):
    stages = {}
    out = process_mesh(cube, ProcessConfig(), stages)
    assert validate_mesh(out).watertight
    assert set(stages) == {"watertight", "simplified", "smoothed"}
    assert len(out.faces) <= math.ceil(0.2 * len(stages["watertight"].faces))
    cell = grid_cell_size(cube, 1000)
    assert oracles.hausdorff(out, cube, n=1000) <= 2 * cell


def test_pipeline_single_triangle_never_crashes():
    tri = TriangleMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0]], [[0, 1, 2]])
    try:
        out = process_mesh(tri)
    except EmptyResult:
        return
    assert validate_mesh(out).watertight


def test_pipeline_large_noisy_mesh():
    m = icosphere(5)
    rng = np.random.default_rng(3)
    noisy = TriangleMesh(m.vertices * (1 + rng.normal(scale=0.003, size=len(m.vertices)))[:, None], m.faces)
    stages = {}
    out = process_mesh(noisy, ProcessConfig(), stages)
    assert len(out.faces) <= math.ceil(0.2 * len(stages["watertight"].faces))
    assert validate_mesh(out).watertight


def test_pipeline_is_byte_deterministic(tmp_path, shapes):
    m = TriangleMesh(shapes["torus"].vertices, shapes["torus"].faces[5:]).compact()
    save_obj(process_mesh(m), tmp_path / "a.obj")
    save_obj(process_mesh(m), tmp_path / "b.obj")
    assert (tmp_path / "a.obj").read_bytes() == (tmp_path / "b.obj").read_bytes()


def test_unit_cube_passthrough_volume():
    out = process_mesh(unit_cube())
    # the half-cell outward offset can only grow the solid
    assert out.volume > 1.0
