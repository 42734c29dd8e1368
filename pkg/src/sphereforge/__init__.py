"""Conservative sphere covers for robot collision meshes."""

from . import errors
from .bench import BenchReport, Environment, check_collision, distance_query, generate_environment, run_benchmark
from .geometry import MeshBvh, Sphere, SphereSet, TriangleMesh, load_mesh, validate_mesh
from .kernels import BACKEND
from .preprocess import ProcessConfig, make_watertight, process_mesh, simplify_qem, smooth_manifold
from .spherize import (
    CoverageReport,
    SphereTree,
    SpherizationConfig,
    fidelity_report,
    spherize_grid,
    spherize_medial,
    spherize_mesh,
    verify_coverage,
)
from .urdf import (
    RobotModel,
    forward_kinematics,
    get_urdf_meshes,
    load_urdf,
    save_urdf,
    set_urdf_spheres,
    spherize_primitive,
    spherize_robot,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BenchReport",
    "CoverageReport",
    "Environment",
    "MeshBvh",
    "ProcessConfig",
    "RobotModel",
    "Sphere",
    "SphereSet",
    "SphereTree",
    "SpherizationConfig",
    "TriangleMesh",
    "check_collision",
    "distance_query",
    "errors",
    "fidelity_report",
    "forward_kinematics",
    "generate_environment",
    "get_urdf_meshes",
    "load_mesh",
    "load_urdf",
    "make_watertight",
    "process_mesh",
    "run_benchmark",
    "save_urdf",
    "set_urdf_spheres",
    "simplify_qem",
    "smooth_manifold",
    "spherize_grid",
    "spherize_medial",
    "spherize_mesh",
    "spherize_primitive",
    "spherize_robot",
    "validate_mesh",
    "verify_coverage",
]
