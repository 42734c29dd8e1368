"""``spherize`` command line: mesh, urdf, validate and bench subcommands.

Exit codes: 0 success, 1 I/O or parse error, 2 spherization failure,
3 invalid flags, 4 validation found a non-watertight mesh, 5 the two
benchmarked models differ in structure.
"""

import argparse
import dataclasses
import logging
import os
import re
import sys

from . import errors
from .geometry.meshio import load_mesh, save_obj
from .geometry.mesh import validate_mesh
from .preprocess import ProcessConfig
from .spherize import SpherizationConfig, spherize_mesh
from .spherize.config import METHODS
from .urdf.model import atomic_write

log = logging.getLogger("sphereforge")

EXIT_OK, EXIT_IO, EXIT_FIT, EXIT_FLAGS, EXIT_INVALID, EXIT_MISMATCH = 0, 1, 2, 3, 4, 5
HELP_WIDTH = 100

# raised while reading inputs; everything else from the library is a fit failure
_INPUT_ERRORS = (
    OSError, errors.UnsupportedFormat, errors.MalformedMesh, errors.XmlError, errors.KinematicLoop,
    errors.MissingLink, errors.UnsupportedJoint, errors.MeshNotFound, errors.UnknownLink,
)

_HELP = {
    "depth": "sphere-tree levels",
    "branch": "sphere budget per level (per collision element for robots)",
    "method": "fitting method",
    "testerLevels": "tester resolution, 10**N points per sphere",
    "numCover": "surface points the spheres must contain",
    "minCover": "fewest cover points a sphere may keep",
    "initSpheres": "surface samples used to seed medial balls",
    "minSpheres": "fewest medial balls accepted before resampling",
    "erFact": "split spheres whose error exceeds this multiple of the median",
    "expand": "grow radii until the whole surface is covered",
    "merge": "merge overlapping spheres when protrusion barely grows",
    "burst": "split the worst sphere once when the budget allows",
    "optimise": "search medial centres for the tightest fit",
    "maxOptLevel": "rounds of centre search",
    "balExcess": "merge tolerance as a fraction of the mean radius",
    "verify": "check coverage on fresh samples and refit once if short",
    "num_samples": "verification samples",
    "min_samples": "uncovered verification samples tolerated",
    "grid_resolution": "cell size of the grid method (m)",
    "manifold_leaves": "remesh resolution: about 8x this many grid cells",
    "ratio": "fraction of faces kept by simplification",
    "smooth_iterations": "smoothing passes",
    "hc_alpha": "smoothing pull toward the original positions",
    "hc_beta": "smoothing correction weight",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


class _Formatter(argparse.HelpFormatter):
    """Fixed width, and every flag that takes a value shows its default."""

    def __init__(self, prog):
        super().__init__(prog, width=HELP_WIDTH, max_help_position=32)

    def _get_help_string(self, action):
        text = action.help or ""
        if "default" in text or action.default in (None, argparse.SUPPRESS, []) or action.nargs == 0:
            if isinstance(action, argparse.BooleanOptionalAction) and "default" not in text:
                return text + " (default: %(default)s)"
            return text
        return text + " (default: %(default)s)"


def _formatter(prog):
    return _Formatter(prog)


def flag_name(field):
    """``numCover`` -> ``--num-cover``, ``grid_resolution`` -> ``--grid-resolution``."""
    return "--" + re.sub(r"(?<!^)(?=[A-Z])", "-", field).lower().replace("_", "-")


def _add_config_flags(parser):
    sph = parser.add_argument_group("spherization")
    for f in dataclasses.fields(SpherizationConfig):
        if f.name == "seed":
            continue
        kw = {"dest": f.name, "default": f.default, "help": _HELP[f.name]}
        if f.type in (bool, "bool"):
            kw["action"] = argparse.BooleanOptionalAction
        elif f.name == "method":
            kw["choices"] = METHODS
        else:
            integer = f.type in (int, "int")
            kw["type"] = int if integer else float
            kw["metavar"] = "N" if integer else "X"
        sph.add_argument(flag_name(f.name), **kw)
    proc = parser.add_argument_group("mesh processing")
    for f in dataclasses.fields(ProcessConfig):
        if f.name == "seed":
            continue
        integer = f.type in (int, "int")
        proc.add_argument(flag_name(f.name), dest=f.name, default=f.default, help=_HELP[f.name],
                          type=int if integer else float, metavar="N" if integer else "X")
    parser.add_argument("--seed", type=int, default=0, metavar="N", help="seed for every random choice")


def _configs(args):
    sph = {f.name: getattr(args, f.name) for f in dataclasses.fields(SpherizationConfig) if f.name != "seed"}
    proc = {f.name: getattr(args, f.name) for f in dataclasses.fields(ProcessConfig) if f.name != "seed"}
    try:
        return SpherizationConfig(seed=args.seed, **sph), ProcessConfig(seed=args.seed, **proc)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_parser():
    p = _Parser(prog="spherize", description="Cover robot collision meshes with spheres.",
                formatter_class=_formatter)
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("mesh", help="spherize one mesh file", formatter_class=_formatter)
    m.add_argument("path", help="OBJ or STL mesh")
    m.add_argument("--output", "-o", default=None, metavar="PATH",
                   help="output JSON path, '-' for standard output (default: <stem>-spheres.json)")
    m.add_argument("--dump-stages", metavar="DIR", default=None,
                   help="write the watertight, simplified and smoothed meshes as OBJ files")
    m.add_argument("--no-preprocess", dest="preprocess", action="store_false",
                   help="fit the input directly (it must be watertight)")
    _add_config_flags(m)

    u = sub.add_parser("urdf", help="replace a URDF's collision geometry with spheres",
                       formatter_class=_formatter)
    u.add_argument("path", help="URDF file")
    u.add_argument("--output", "-o", default=None, metavar="PATH",
                   help="output path, '-' for standard output "
                        "(default: <stem>-spherized.urdf or <stem>-spheres.json)")
    u.add_argument("--format", choices=("urdf", "json"), default="urdf",
                   help="rewritten URDF or a link-keyed sphere database")
    u.add_argument("--search-path", action="append", default=[], metavar="DIR",
                   help="extra root for mesh and package:// lookup (repeatable)")
    u.add_argument("--dump-stages", metavar="DIR", default=None,
                   help="write intermediate meshes as <link>-<n>-<stage>.obj")
    _add_config_flags(u)

    v = sub.add_parser("validate", help="report mesh topology", formatter_class=_formatter)
    v.add_argument("path", help="mesh file or URDF")
    v.add_argument("--search-path", action="append", default=[], metavar="DIR",
                   help="extra root for mesh and package:// lookup (repeatable)")

    b = sub.add_parser("bench", help="time a mesh model against its sphere model",
                       formatter_class=_formatter)
    b.add_argument("original", help="URDF with the original collision geometry")
    b.add_argument("spherized", nargs="?", default=None, help="spherized URDF (omit with --auto)")
    b.add_argument("--auto", action="store_true", help="spherize the original first")
    b.add_argument("--queries", type=int, metavar="N", default=1000, help="timed queries")
    b.add_argument("--envs", type=int, metavar="N", default=10, help="random environments")
    b.add_argument("--obstacles", type=int, metavar="N", default=5, help="obstacles per environment")
    b.add_argument("--warmup", type=int, metavar="N", default=100, help="untimed queries run first")
    b.add_argument("--csv", default=None, metavar="PATH", help="per-query CSV dump")
    b.add_argument("--search-path", action="append", default=[], metavar="DIR",
                   help="extra root for mesh and package:// lookup (repeatable)")
    _add_config_flags(b)
    return p


def _emit(path, text):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        atomic_write(path, text)


def _stem(path):
    return os.path.splitext(os.path.abspath(path))[0]


def _dump(directory, prefix, stages):
    os.makedirs(directory, exist_ok=True)
    for name, mesh in stages.items():
        save_obj(mesh, os.path.join(directory, f"{prefix}{name}.obj"))


def cmd_spherize_mesh(args):
    sph, proc = _configs(args)
    mesh = _load_input(load_mesh, args.path)
    stages = {} if args.dump_stages else None
    tree = spherize_mesh(mesh, sph, proc, preprocess=args.preprocess, stages=stages)
    out = args.output or _stem(args.path) + "-spheres.json"
    _emit(out, tree.to_json())
    if stages:
        _dump(args.dump_stages, "", stages)
    cov = tree.coverage.fraction_covered if tree.coverage else float("nan")
    print(f"{len(tree.leaves)} spheres, coverage {cov:.4f}", file=sys.stderr)
    return EXIT_OK


def cmd_spherize_urdf(args):
    from .urdf import database_to_json, load_urdf, set_urdf_spheres, spherize_robot, urdf_to_string

    sph, proc = _configs(args)
    model = _load_input(load_urdf, args.path, args.search_path)
    stage_dir = args.dump_stages

    def progress(link, index, spheres, coverage):
        cov = f", coverage {coverage.fraction_covered:.4f}" if coverage else ""
        log.info("%s[%d]: %d spheres%s", link, index, len(spheres), cov)

    if stage_dir:
        spheres = _spherize_robot_dumping(model, sph, proc, stage_dir)
    else:
        spheres = spherize_robot(model, sph, proc, on_collision=progress)
    if args.format == "json":
        text = database_to_json(spheres)
        default = _stem(args.path) + "-spheres.json"
    else:
        text = urdf_to_string(set_urdf_spheres(model, spheres))
        default = _stem(args.path) + "-spherized.urdf"
    _emit(args.output or default, text)
    total = sum(len(s) for s in spheres.values())
    print(f"{total} spheres over {len(spheres)} links", file=sys.stderr)
    return EXIT_OK


def _spherize_robot_dumping(model, sph, proc, directory):
    from .geometry.spheres import SphereSet
    from .urdf import get_urdf_meshes, spherize_primitive

    refs = {(r.link, r.index): r for r in get_urdf_meshes(model)}
    out = {}
    for link in model.links.values():
        if not link.collisions:
            continue
        parts = []
        for i, geom in enumerate(link.collisions):
            if geom.kind != "mesh":
                parts.append(spherize_primitive(geom, sph))
                continue
            stages = {}
            tree = spherize_mesh(refs[(link.name, i)].load(), sph, proc, stages=stages)
            _dump(directory, f"{link.name}-{i}-", stages)
            leaves = tree.leaves
            parts.append(leaves if geom.origin.is_identity else leaves.transformed(geom.origin.matrix))
        out[link.name] = SphereSet.concatenate(parts)
    return out


def _validate_urdf(args):
    from .urdf import get_urdf_meshes, load_urdf

    model = load_urdf(args.path, args.search_path)
    ok = True
    for ref in get_urdf_meshes(model):
        report = validate_mesh(_load_input(ref.load))
        ok &= report.watertight
        print(f"[{ref.link}] {ref.path}")
        print("\n".join("  " + line for line in report.lines()))
    return ok


def cmd_validate(args):
    if args.path.lower().endswith(".urdf"):
        ok = _validate_urdf(args)
    else:
        report = validate_mesh(_load_input(load_mesh, args.path))
        ok = report.watertight
        print("\n".join(report.lines()))
    return EXIT_OK if ok else EXIT_INVALID


def cmd_bench(args):
    from .bench import run_benchmark
    from .bench.runner import records_to_csv
    from .urdf import load_urdf, spherize_urdf

    if args.queries < 1 or args.envs < 1 or args.obstacles < 0 or args.warmup < 0:
        raise UsageError("--queries and --envs must be >= 1, --obstacles and --warmup >= 0")
    if (args.spherized is None) == (not args.auto):
        raise UsageError("give either a spherized URDF or --auto")
    original = _load_input(load_urdf, args.original, args.search_path)
    if args.auto:
        sph, proc = _configs(args)
        spherized, _ = spherize_urdf(original, sph, proc)
    else:
        spherized = _load_input(load_urdf, args.spherized, args.search_path)
    report, records = run_benchmark(original, spherized, args.queries, args.envs, args.seed,
                                    obstacles=args.obstacles, warmup=args.warmup)
    sys.stdout.write(report.table())
    if args.csv:
        atomic_write(args.csv, records_to_csv(records))
    return EXIT_OK


class _InputError(Exception):
    pass


def _load_input(fn, *a):
    try:
        return fn(*a)
    except (*_INPUT_ERRORS, errors.DegenerateMesh) as exc:
        raise _InputError(exc) from exc


_COMMANDS = {
    "mesh": cmd_spherize_mesh,
    "urdf": cmd_spherize_urdf,
    "validate": cmd_validate,
    "bench": cmd_bench,
}


def _describe(exc):
    if isinstance(exc, FileNotFoundError) and exc.filename is None and exc.args:
        return f"file not found: {exc.args[0]}"
    if isinstance(exc, FileNotFoundError):
        return f"file not found: {exc.filename}"
    return str(exc) or type(exc).__name__


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FLAGS
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"spherize: error: {exc}", file=sys.stderr)
        return EXIT_FLAGS
    except _InputError as exc:
        print(f"spherize: error: {_describe(exc.__cause__)}", file=sys.stderr)
        return EXIT_IO
    except errors.StructureMismatch as exc:
        print(f"spherize: error: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except _INPUT_ERRORS as exc:
        print(f"spherize: error: {_describe(exc)}", file=sys.stderr)
        return EXIT_IO
    except errors.SphereForgeError as exc:
        print(f"spherize: spherization failed: {exc}", file=sys.stderr)
        return EXIT_FIT


if __name__ == "__main__":
    sys.exit(main())
