import json
import os
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from conftest import PACKAGES, URDF_DIR
from sphereforge.cli import build_parser, flag_name, main
from sphereforge.geometry.meshio import save_obj
from sphereforge.geometry.shapes import box_bounds, icosphere
from sphereforge.preprocess import ProcessConfig
from sphereforge.spherize import SpherizationConfig

SNAPSHOTS = os.path.join(os.path.dirname(__file__), "snapshots")
COMMANDS = ("", "mesh", "urdf", "validate", "bench")


@pytest.fixture
def cube_obj(tmp_path):
    path = tmp_path / "cube.obj"
    save_obj(box_bounds((0, 0, 0), (1, 1, 1)), path)
    return path


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


# -- help and flags -----------------------------------------------------------------------


def help_text(command):
    parser = build_parser()
    if not command:
        return parser.format_help()
    sub = next(a for a in parser._actions if a.dest == "command")
    return sub.choices[command].format_help()


@pytest.mark.parametrize("command", COMMANDS, ids=lambda c: c or "top")
def test_help_snapshot(command):
    name = f"help-{command or 'top'}.txt"
    with open(os.path.join(SNAPSHOTS, name)) as fh:
        assert help_text(command) == fh.read()


@pytest.mark.parametrize("command", ("mesh", "urdf", "bench"))
def test_help_lists_every_flag_with_default(command):
    text = help_text(command)
    for cls in (SpherizationConfig, ProcessConfig):
        for field in cls.__dataclass_fields__.values():
            if field.name == "seed":
                continue
            flag = flag_name(field.name)
            assert flag in text
            # the line describing this flag names its default
            line = next(i for i, l in enumerate(text.splitlines()) if l.strip().startswith(flag))
            block = " ".join(text.splitlines()[line:line + 3])
            assert "(default:" in block
    assert "--seed" in text


def test_flag_defaults_match_configs():
    args = build_parser().parse_args(["mesh", "x.obj"])
    for cls in (SpherizationConfig, ProcessConfig):
        for field in cls.__dataclass_fields__.values():
            assert getattr(args, field.name) == field.default


def test_kebab_names():
    assert flag_name("numCover") == "--num-cover"
    assert flag_name("manifold_leaves") == "--manifold-leaves"
    assert flag_name("balExcess") == "--bal-excess"


@pytest.mark.parametrize("argv", [
    ["mesh", "cube.obj", "--branch", "0"],
    ["mesh", "cube.obj", "--ratio", "2"],
    ["mesh", "cube.obj", "--method", "octree"],
    ["mesh", "cube.obj", "--bogus"],
    ["frobnicate"],
    [],
    ["bench", "a.urdf"],
    ["bench", "a.urdf", "--auto", "--queries", "0"],
])
def test_invalid_flags_exit_3(argv, capsys, tmp_path, cube_obj):
    argv = [str(cube_obj) if a == "cube.obj" else a for a in argv]
    code, out, err = run(argv, capsys)
    assert code == 3
    assert err and not out


# -- spherize mesh ------------------------------------------------------------------------------


def test_mesh_grid_cube(capsys, cube_obj):
    code, _, err = run(["mesh", cube_obj, "--method", "grid", "--grid-resolution", "1.0"], capsys)
    assert code == 0
    doc = json.loads((cube_obj.parent / "cube-spheres.json").read_text())
    assert list(doc) == ["spheres", "method", "seed", "coverage"]
    assert len(doc["spheres"]) == 1
    assert doc["spheres"][0]["radius"] == pytest.approx(0.86603, abs=1e-5)
    assert doc["spheres"][0]["center"] == [0.5, 0.5, 0.5]
    assert err.startswith("1 spheres, coverage ")


def test_mesh_to_stdout(capsys, cube_obj):
    code, out, _ = run(["mesh", cube_obj, "--method", "grid", "--grid-resolution", "0.5", "-o", "-"], capsys)
    assert code == 0
    assert len(json.loads(out)["spheres"]) == 8
    assert not (cube_obj.parent / "cube-spheres.json").exists()


def test_missing_mesh_exit_1(capsys, tmp_path):
    missing = tmp_path / "missing.obj"
    code, out, err = run(["mesh", missing], capsys)
    assert code == 1 and "missing.obj" in err
    assert os.listdir(tmp_path) == []


def test_unparsable_mesh_exit_1(capsys, tmp_path):
    bad = tmp_path / "bad.obj"
    bad.write_text("v 0 0 zero\nf 1 2 3\n")
    code, _, err = run(["mesh", bad], capsys)
    assert code == 1 and err
    assert sorted(os.listdir(tmp_path)) == ["bad.obj"]


def test_failed_fit_leaves_no_output(capsys, tmp_path):
    # an open sheet cannot be fitted without preprocessing
    sheet = tmp_path / "sheet.obj"
    sheet.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nf 1 2 3\nf 2 4 3\n")
    code, _, err = run(["mesh", sheet, "--no-preprocess"], capsys)
    assert code == 2 and err
    assert sorted(os.listdir(tmp_path)) == ["sheet.obj"]


def test_existing_output_survives_failure(capsys, tmp_path):
    sheet = tmp_path / "sheet.obj"
    sheet.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    target = tmp_path / "keep.json"
    target.write_text("previous")
    code, _, _ = run(["mesh", sheet, "--no-preprocess", "-o", target], capsys)
    assert code == 2 and target.read_text() == "previous"


def test_dump_stages(capsys, tmp_path):
    path = tmp_path / "ball.obj"
    save_obj(icosphere(2), path)
    stages = tmp_path / "stages"
    code, _, _ = run(["mesh", path, "--branch", "2", "--dump-stages", stages], capsys)
    assert code == 0
    assert sorted(os.listdir(stages)) == ["simplified.obj", "smoothed.obj", "watertight.obj"]


# -- spherize urdf ------------------------------------------------------------------------------


def test_urdf_primitives_budget(capsys, tmp_path):
    text = open(os.path.join(URDF_DIR, "mixed_primitives.urdf")).read()
    src = tmp_path / "mixed.urdf"
    src.write_text(text)
    code, _, _ = run(["urdf", src, "--branch", "2"], capsys)
    assert code == 0
    out = ET.parse(tmp_path / "mixed-spherized.urdf").getroot()
    orig = ET.fromstring(text)
    for link in out.iter("link"):
        cols = link.findall("collision")
        n_orig = len(next(l for l in orig.iter("link") if l.get("name") == link.get("name")).findall("collision"))
        assert 1 <= len(cols) <= 2 * n_orig
        assert all([g.tag for g in c.find("geometry")] == ["sphere"] for c in cols)


def test_urdf_package_uri_needs_search_path(capsys, tmp_path):
    src = os.path.join(URDF_DIR, "package_robot.urdf")
    out = tmp_path / "o.urdf"
    code, _, err = run(["urdf", src, "-o", out, "--branch", "2"], capsys)
    assert code == 1 and "package://corpus_pkg/meshes/arm.obj" in err
    assert not out.exists()
    code, _, _ = run(["urdf", src, "-o", out, "--branch", "2", "--search-path", PACKAGES], capsys)
    assert code == 0
    assert "<mesh" not in out.read_text()


def test_urdf_lists_every_missing_mesh(capsys, tmp_path):
    src = tmp_path / "r.urdf"
    src.write_text('<robot name="r"><link name="a"><collision><geometry><mesh filename="x.obj"/></geometry>'
                   '</collision><collision><geometry><mesh filename="y.stl"/></geometry></collision></link></robot>')
    code, _, err = run(["urdf", src], capsys)
    assert code == 1 and "x.obj" in err and "y.stl" in err


def test_urdf_json_database_is_deterministic(capsys, tmp_path):
    src = os.path.join(URDF_DIR, "mesh_robot.urdf")
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        code, _, _ = run(["urdf", src, "--format", "json", "--branch", "3", "--seed", "5", "-o", out], capsys)
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    doc = json.loads(a.read_text())
    assert list(doc) == ["body", "head"]
    assert all(set(s) == {"center", "radius"} for e in doc.values() for s in e["spheres"])


def test_urdf_malformed_exit_1(capsys, tmp_path):
    src = tmp_path / "bad.urdf"
    src.write_text("<robot><link name='a'></robot>")
    code, _, err = run(["urdf", src], capsys)
    assert code == 1 and err


# -- validate ------------------------------------------------------------------------------------


def test_validate_watertight(capsys, tmp_path):
    path = tmp_path / "ball.obj"
    save_obj(icosphere(2), path)
    code, out, _ = run(["validate", path], capsys)
    assert code == 0 and "watertight: true" in out


def test_validate_single_triangle(capsys, tmp_path):
    path = tmp_path / "tri.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    code, out, _ = run(["validate", path], capsys)
    assert code == 4
    assert "boundary_edge_count: 3" in out and "watertight: false" in out


def test_validate_urdf_blocks(capsys):
    from sphereforge.assets import test_robot_path

    code, out, _ = run(["validate", test_robot_path()], capsys)
    assert code == 0
    blocks = [l for l in out.splitlines() if l.startswith("[")]
    assert [b.split("]")[0][1:] for b in blocks] == ["base", "upper_arm", "forearm"]


def test_validate_missing_file(capsys, tmp_path):
    code, _, err = run(["validate", tmp_path / "nope.stl"], capsys)
    assert code == 1 and "nope.stl" in err


# -- bench ----------------------------------------------------------------------------------------


def test_bench_self_prints_zero(capsys, tmp_path):
    src = os.path.join(URDF_DIR, "mixed_primitives.urdf")
    csv_path = tmp_path / "q.csv"
    code, out, _ = run(["bench", src, src, "--queries", "40", "--envs", "2", "--warmup", "0",
                        "--csv", csv_path], capsys)
    assert code == 0
    assert "% Diff." in out and "Δ Col. (ms)" in out and "Δ Dis. (ms)" in out
    assert "0.00000%" in out
    assert len(csv_path.read_text().splitlines()) == 41


def test_bench_repeatable_verdicts(capsys):
    src = os.path.join(URDF_DIR, "mixed_primitives.urdf")
    diffs = []
    for _ in range(2):
        code, out, _ = run(["bench", src, "--auto", "--branch", "2", "--queries", "100", "--envs", "5",
                            "--seed", "7", "--warmup", "0"], capsys)
        assert code == 0
        diffs.append(out.splitlines()[1].split()[-1])
    assert diffs[0] == diffs[1]


def test_bench_structure_mismatch_exit_5(capsys):
    a = os.path.join(URDF_DIR, "mixed_primitives.urdf")
    b = os.path.join(URDF_DIR, "fixed_chain.urdf")
    code, _, err = run(["bench", a, b, "--queries", "1"], capsys)
    assert code == 5 and err


# -- the installed entry point ----------------------------------------------------------------------


def test_console_entry_point(tmp_path, cube_obj):
    proc = subprocess.run([sys.executable, "-m", "sphereforge.cli", "mesh", str(cube_obj), "--method", "grid",
                           "--grid-resolution", "1", "-o", "-"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)["spheres"]) == 1
    assert "spheres, coverage" in proc.stderr
