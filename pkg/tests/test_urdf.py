import math
import os
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

import oracles
from conftest import PACKAGES, URDF_CORPUS, URDF_DIR
from sphereforge.errors import (
    KinematicLoop,
    LimitViolation,
    MeshNotFound,
    MissingLink,
    UnknownJoint,
    UnknownLink,
    UnsupportedJoint,
    XmlError,
)
from sphereforge.geometry.spheres import SphereSet
from sphereforge.spherize import SpherizationConfig
from sphereforge.urdf import (
    IDENTITY,
    CollisionGeometry,
    Pose,
    database_from_json,
    database_to_json,
    forward_kinematics,
    get_urdf_meshes,
    link_matrices,
    load_urdf,
    parse_urdf,
    random_configuration,
    resolve_uri,
    save_urdf,
    set_urdf_spheres,
    spherize_primitive,
    urdf_to_string,
)


def robot(body):
    return f'<?xml version="1.0"?>\n<robot name="t">{body}</robot>'


def link(name, inner=""):
    return f'<link name="{name}">{inner}</link>'


def joint(name, kind, parent, child, extra=""):
    return (f'<joint name="{name}" type="{kind}"><parent link="{parent}"/>'
            f'<child link="{child}"/>{extra}</joint>')


def collision_tags(model, link_name):
    el = next(e for e in model.document.getroot().findall("link") if e.get("name") == link_name)
    return el.findall("collision")


# -- loading -----------------------------------------------------------------------------


def test_single_link_model():
    m = load_urdf(os.path.join(URDF_DIR, "single_link.urdf"))
    assert list(m.links) == ["only"] and m.root_link == "only" and m.joints == []
    (geom,) = m.links["only"].collisions
    assert geom.kind == "box" and geom.get("size") == (0.5, 0.4, 0.3)


def test_fixed_joint_translation():
    m = load_urdf(os.path.join(URDF_DIR, "fixed_chain.urdf"))
    fk = forward_kinematics(m, {})
    assert np.allclose(fk["B"].matrix, oracles.homogeneous((0, 0, 1), (0, 0, 0)), atol=0)
    assert fk["A"].is_identity


def test_missing_link():
    with pytest.raises(MissingLink):
        parse_urdf(robot(link("A") + joint("j", "fixed", "A", "ghost")))


@pytest.mark.parametrize("body,err", [
    (link("A") + link("B") + joint("j1", "fixed", "A", "B") + joint("j2", "fixed", "B", "A"), KinematicLoop),
    (link("A") + link("B") + link("C") + joint("j1", "fixed", "A", "C") + joint("j2", "fixed", "B", "C"),
     KinematicLoop),
    (link("A") + joint("j", "fixed", "A", "A"), KinematicLoop),
    (link("A") + link("B"), KinematicLoop),
    (link("A") + link("B") + joint("j", "planar", "A", "B"), UnsupportedJoint),
    (link("A") + link("B") + joint("j", "floating", "A", "B"), UnsupportedJoint),
    (link("A") + link("B") + joint("j", "hinge", "A", "B"), XmlError),
    (link("A") + link("B") + joint("j", "revolute", "A", "B"), XmlError),  # no limits
    (link("A") + link("A"), XmlError),
    (link("A", '<collision><geometry><box size="1 0 1"/></geometry></collision>'), XmlError),
    (link("A", '<collision><geometry><sphere radius="-1"/></geometry></collision>'), XmlError),
    (link("A", '<collision><geometry><mesh filename=""/></geometry></collision>'), XmlError),
    (link("A", '<collision><geometry><capsule radius="1" length="1"/></geometry></collision>'), XmlError),
    (link("A", '<collision><origin xyz="0 nan 0"/><geometry><sphere radius="1"/></geometry></collision>'),
     XmlError),
    ("", XmlError),
])
def test_invalid_documents(body, err):
    with pytest.raises(err):
        parse_urdf(robot(body))


def test_malformed_xml_and_wrong_root():
    with pytest.raises(XmlError):
        parse_urdf("<robot><link name='a'></robot>")
    with pytest.raises(XmlError):
        parse_urdf("<model><link name='a'/></model>")


def test_missing_file():
    with pytest.raises(FileNotFoundError):
        load_urdf("/nonexistent/robot.urdf")


def test_axis_normalised():
    m = parse_urdf(robot(link("A") + link("B") + joint(
        "j", "continuous", "A", "B", '<axis xyz="0 0 2"/>')))
    assert m.joints[0].axis == (0.0, 0.0, 1.0)
    assert m.joints[0].limits is None


# -- mesh references ---------------------------------------------------------------------


def test_two_meshes_on_one_link():
    m = load_urdf(os.path.join(URDF_DIR, "mesh_robot.urdf"))
    refs = get_urdf_meshes(m)
    assert [r.link for r in refs] == ["body", "body", "head"]
    assert [os.path.basename(r.path) for r in refs] == ["ball.obj", "block.stl", "ball.obj"]
    assert all(os.path.isabs(r.path) for r in refs)
    assert refs[1].scale == (1.0, 1.0, 0.5)
    assert refs[1].origin == Pose((0, 0, 0.2), (0, 0.5, 0))


def test_primitives_only_gives_no_meshes():
    for name in ("single_link.urdf", "fixed_chain.urdf", "mixed_primitives.urdf"):
        assert get_urdf_meshes(load_urdf(os.path.join(URDF_DIR, name))) == []


def test_package_uri_with_search_path():
    path = os.path.join(URDF_DIR, "package_robot.urdf")
    with pytest.raises(MeshNotFound):
        get_urdf_meshes(load_urdf(path))
    (ref,) = get_urdf_meshes(load_urdf(path, search_paths=[PACKAGES]))
    assert ref.path == os.path.abspath(os.path.join(PACKAGES, "corpus_pkg", "meshes", "arm.obj"))
    # the package root itself as a search path also resolves
    got = resolve_uri("package://corpus_pkg/meshes/arm.obj", "/nowhere", [os.path.join(PACKAGES, "corpus_pkg")])
    assert got == ref.path


def test_resolution_order_prefers_urdf_directory(tmp_path):
    (tmp_path / "a").mkdir()
    (tmp_path / "b").mkdir()
    (tmp_path / "a" / "m.obj").write_text("v 0 0 0\n")
    (tmp_path / "b" / "m.obj").write_text("v 0 0 0\n")
    assert resolve_uri("m.obj", str(tmp_path / "a"), [str(tmp_path / "b")]) == str(tmp_path / "a" / "m.obj")
    assert resolve_uri("m.obj", str(tmp_path), [str(tmp_path / "b"), str(tmp_path / "a")]) == str(
        tmp_path / "b" / "m.obj")
    assert resolve_uri(str(tmp_path / "a" / "m.obj"), "/", []) == str(tmp_path / "a" / "m.obj")


def test_missing_meshes_reported_together():
    text = robot(
        link("A", '<collision><geometry><mesh filename="nope1.obj"/></geometry></collision>')
        + link("B", '<collision><geometry><mesh filename="package://x/nope2.stl"/></geometry></collision>')
        + joint("j", "fixed", "A", "B"))
    with pytest.raises(MeshNotFound) as info:
        get_urdf_meshes(parse_urdf(text, "/tmp"))
    assert info.value.missing == [("A", "nope1.obj"), ("B", "package://x/nope2.stl")]
    assert "nope1.obj" in str(info.value) and "nope2.stl" in str(info.value)


def test_mesh_scale_applied_on_load():
    m = load_urdf(os.path.join(URDF_DIR, "mesh_robot.urdf"))
    ref = get_urdf_meshes(m)[2]
    from sphereforge.geometry.meshio import load_mesh

    raw = load_mesh(ref.path)
    assert np.allclose(ref.load().vertices, raw.vertices * 0.5)


# -- rewriting -----------------------------------------------------------------------------


THREE = SphereSet([(0, 0, 0), (0.1, 0, 0), (0, 0.1, 0)], [0.05, 0.06, 0.07])


def test_three_spheres_replace_mesh():
    m = load_urdf(os.path.join(URDF_DIR, "mesh_robot.urdf"))
    out = set_urdf_spheres(m, {"head": THREE})
    cols = collision_tags(out, "head")
    assert len(cols) == 3
    for col, s in zip(cols, THREE):
        assert [g.tag for g in col.find("geometry")] == ["sphere"]
        assert col.find("origin").get("rpy") == "0 0 0"
        assert tuple(map(float, col.find("origin").get("xyz").split())) == s.center
    assert len(collision_tags(out, "body")) == 2  # untouched
    assert [g.kind for g in out.links["head"].collisions] == ["sphere"] * 3


def test_empty_map_is_identity():
    for path in URDF_CORPUS:
        m = load_urdf(path, search_paths=[PACKAGES])
        assert urdf_to_string(set_urdf_spheres(m, {})) == urdf_to_string(m)


def test_radius_prints_shortest_decimal():
    sph = spherize_primitive(CollisionGeometry("sphere", (("radius", 0.1),)))
    m = load_urdf(os.path.join(URDF_DIR, "single_link.urdf"))
    out = set_urdf_spheres(m, {"only": sph})
    assert collision_tags(out, "only")[0].find("geometry/sphere").get("radius") == "0.1"
    assert 'radius="0.1"' in urdf_to_string(out)


def test_unknown_link_rejected():
    m = load_urdf(os.path.join(URDF_DIR, "single_link.urdf"))
    with pytest.raises(UnknownLink):
        set_urdf_spheres(m, {"nope": THREE})


def test_payloads_survive_rewrite():
    m = load_urdf(os.path.join(URDF_DIR, "fixed_chain.urdf"))
    out = set_urdf_spheres(m, {"A": THREE, "B": THREE})
    text = urdf_to_string(out)
    for fragment in ("<mass value=\"1.5\" />", "<mu1>0.2</mu1>", "SimpleTransmission",
                     'rgba="0.5 0.5 0.5 1"'):
        assert fragment in text
    assert "cylinder" in text  # the visual keeps its cylinder
    root = ET.fromstring(text)
    assert all(g.tag == "sphere" for g in root.iter() if g.tag in ("box", "cylinder", "mesh", "sphere")
               and g in [x for c in root.iter("collision") for x in c.iter()])


def test_comments_inside_robot_survive():
    m = parse_urdf(robot("<!-- keep me -->" + link("A", "<!-- and me --><collision><geometry>"
                                                       '<sphere radius="1"/></geometry></collision>')))
    text = urdf_to_string(set_urdf_spheres(m, {"A": THREE}))
    assert "<!-- keep me -->" in text and "<!-- and me -->" in text


def test_rewrite_totality_over_corpus():
    for path in URDF_CORPUS:
        m = load_urdf(path, search_paths=[PACKAGES])
        keyed = {n: THREE for n, l in m.links.items() if any(g.kind == "mesh" for g in l.collisions)}
        out = ET.fromstring(urdf_to_string(set_urdf_spheres(m, keyed)))
        assert not [e for c in out.iter("collision") for e in c.iter("mesh")]


# -- saving ----------------------------------------------------------------------------------


@pytest.mark.parametrize("path", URDF_CORPUS, ids=os.path.basename)
def test_round_trip_and_idempotent(path, tmp_path):
    m = load_urdf(path, search_paths=[PACKAGES])
    p1, p2 = tmp_path / "one.urdf", tmp_path / "two.urdf"
    save_urdf(m, p1)
    m2 = load_urdf(p1)
    assert m2 == m
    assert len(m2.links) == len(m.links) and [j.kind for j in m2.joints] == [j.kind for j in m.joints]
    save_urdf(m2, p2)
    assert p1.read_bytes() == p2.read_bytes()
    # two-space indentation
    assert "\n  <link" in p1.read_text()


def test_round_trip_is_exact_for_awkward_numbers(tmp_path):
    m = parse_urdf(robot(link("A", '<collision><origin xyz="0.1 1e-07 -3.3333333333333335"/>'
                                   '<geometry><sphere radius="0.30000000000000004"/></geometry></collision>')))
    save_urdf(m, tmp_path / "r.urdf")
    back = load_urdf(tmp_path / "r.urdf")
    (g,) = back.links["A"].collisions
    assert g.get("radius") == 0.30000000000000004
    assert g.origin.xyz == (0.1, 1e-07, -3.3333333333333335)


def test_unwritable_directory_raises_oserror(tmp_path):
    m = load_urdf(os.path.join(URDF_DIR, "single_link.urdf"))
    with pytest.raises(OSError):
        save_urdf(m, tmp_path / "missing" / "out.urdf")


def test_atomic_save_leaves_no_temp_files(tmp_path):
    m = load_urdf(os.path.join(URDF_DIR, "single_link.urdf"))
    save_urdf(m, tmp_path / "out.urdf")
    assert os.listdir(tmp_path) == ["out.urdf"]


# -- kinematics --------------------------------------------------------------------------------


def test_revolute_quarter_turn():
    m = parse_urdf(robot(link("A") + link("B") + joint(
        "j", "revolute", "A", "B", '<axis xyz="0 0 1"/><limit lower="-2" upper="2"/>')))
    r = forward_kinematics(m, {"j": math.pi / 2})["B"].matrix[:3, :3]
    assert np.allclose(r @ [1, 0, 0], [0, 1, 0], atol=1e-12)


def test_zero_config_composes_fixed_origins():
    m = load_urdf(os.path.join(URDF_DIR, "mixed_primitives.urdf"))
    fk = link_matrices(m, {})
    o = {j.name: oracles.homogeneous(j.origin.xyz, j.origin.rpy) for j in m.joints}
    assert np.allclose(fk["turret"], o["yaw"], atol=1e-12)
    assert np.allclose(fk["slider"], o["yaw"] @ o["extend"], atol=1e-12)
    assert np.allclose(fk["wheel"], o["spin"], atol=1e-12)


def test_chain_matches_homogeneous_oracle():
    m = load_urdf(os.path.join(URDF_DIR, "mixed_primitives.urdf"))
    rng = np.random.default_rng(7)
    j = m.joint_map
    for _ in range(3):
        q = random_configuration(m, rng)
        ref = {}
        for name in ("yaw", "extend", "spin"):
            jt = j[name]
            ref[name] = oracles.homogeneous(jt.origin.xyz, jt.origin.rpy) @ oracles.joint_motion(
                jt.kind, jt.axis, q[name])
        fk = link_matrices(m, q)
        assert np.allclose(fk["slider"], ref["yaw"] @ ref["extend"], atol=1e-12)
        assert np.allclose(fk["wheel"], ref["spin"], atol=1e-12)


def test_fk_errors():
    m = load_urdf(os.path.join(URDF_DIR, "mixed_primitives.urdf"))
    with pytest.raises(UnknownJoint):
        forward_kinematics(m, {"elbow": 0.0})
    with pytest.raises(LimitViolation):
        forward_kinematics(m, {"extend": 0.5})
    forward_kinematics(m, {"spin": 100.0})  # continuous: unlimited


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1))
def test_fk_is_rigid_per_link(seed):
    m = load_urdf(os.path.join(URDF_DIR, "mixed_primitives.urdf"))
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(2, 3))
    ref = np.linalg.norm(pts[0] - pts[1])
    for mat in link_matrices(m, random_configuration(m, rng)).values():
        w = pts @ mat[:3, :3].T + mat[:3, 3]
        assert abs(np.linalg.norm(w[0] - w[1]) - ref) <= 1e-12


finite = st.floats(-3.0, 3.0, allow_nan=False)
poses = st.builds(lambda x, r: Pose(x, r), st.tuples(finite, finite, finite), st.tuples(finite, finite, finite))


@settings(max_examples=60, deadline=None)
@given(poses, poses, poses)
def test_pose_composition_associative(a, b, c):
    assert np.allclose(((a @ b) @ c).matrix, (a @ (b @ c)).matrix, atol=1e-12)
    assert np.allclose((a @ IDENTITY).matrix, a.matrix, atol=1e-15)
    assert np.allclose((IDENTITY @ a).matrix, a.matrix, atol=1e-15)


@settings(max_examples=60, deadline=None)
@given(poses)
def test_pose_matches_scipy_rotation(p):
    ref = oracles.homogeneous(p.xyz, p.rpy)
    assert np.allclose(p.matrix, ref, atol=1e-12)
    back = Pose(p.xyz, Pose.from_matrix(p.matrix).rpy)
    assert np.allclose(back.matrix, p.matrix, atol=1e-9)


def test_pose_rejects_non_finite():
    with pytest.raises(ValueError):
        Pose((0, math.inf, 0))


# -- primitives and the database ------------------------------------------------------------


def test_sphere_primitive_is_itself():
    s = spherize_primitive(CollisionGeometry("sphere", (("radius", 0.1),)))
    assert len(s) == 1 and s[0].center == (0.0, 0.0, 0.0) and s[0].radius == 0.1


def test_sphere_primitive_follows_origin():
    s = spherize_primitive(CollisionGeometry("sphere", (("radius", 0.1),), Pose((1, 2, 3), (0.3, 0, 0))))
    assert np.allclose(s.centers, [[1, 2, 3]]) and s.radii[0] == pytest.approx(0.1)


def test_unit_box_one_sphere():
    s = spherize_primitive(CollisionGeometry("box", (("size", (1.0, 1.0, 1.0)),)), SpherizationConfig(branch=1))
    assert len(s) == 1
    assert math.sqrt(3) / 2 - 1e-9 <= s.radii[0] <= math.sqrt(3) / 2 + 0.1


def test_cylinder_three_spheres_on_axis():
    geom = CollisionGeometry("cylinder", (("radius", 0.2), ("length", 1.0)))
    s = spherize_primitive(geom, SpherizationConfig(branch=3))
    assert 1 <= len(s) <= 3
    assert np.all(np.linalg.norm(s.centers[:, :2], axis=1) <= 0.05)


def test_primitive_origin_composes():
    rot = (0.0, math.pi / 2, 0.0)
    geom = CollisionGeometry("cylinder", (("radius", 0.2), ("length", 1.0)), Pose((0, 0, 1), rot))
    local = spherize_primitive(CollisionGeometry("cylinder", geom.params), SpherizationConfig(branch=3))
    moved = spherize_primitive(geom, SpherizationConfig(branch=3))
    expect = local.centers @ Rotation.from_euler("xyz", rot).as_matrix().T + [0, 0, 1]
    assert np.allclose(moved.centers, expect, atol=1e-12)
    assert np.allclose(moved.radii, local.radii)


def test_database_json_round_trip():
    db = {"base": THREE, "tool": SphereSet([(0.5, -0.25, 1e-3)], [0.125])}
    text = database_to_json(db)
    back = database_from_json(text)
    assert list(back) == ["base", "tool"]
    for k in db:
        assert back[k] == db[k].canonical() or back[k] == db[k]
    assert database_to_json(back) == text
    with pytest.raises(ValueError):
        database_from_json("[1, 2]")
