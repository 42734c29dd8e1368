"""Meshes, spheres, spatial queries and small exact-geometry routines."""

from .bvh import MeshBvh, distance_to_mesh, point_inside, points_inside, vote_inside, winding_number
from .medial import shrink_ball, shrink_balls
from .mesh import MeshReport, TriangleMesh, split_components, validate_mesh
from .meshio import format_float, load_mesh, save_obj, save_stl
from .miniball import enclosing_ball, minimal_enclosing_sphere
from .sampling import SurfaceSample, fibonacci_sphere, sample_surface, sample_surface_arrays
from .spheres import Sphere, SphereSet

__all__ = [
    "MeshBvh",
    "MeshReport",
    "Sphere",
    "SphereSet",
    "SurfaceSample",
    "TriangleMesh",
    "distance_to_mesh",
    "enclosing_ball",
    "fibonacci_sphere",
    "format_float",
    "load_mesh",
    "minimal_enclosing_sphere",
    "point_inside",
    "points_inside",
    "sample_surface",
    "sample_surface_arrays",
    "save_obj",
    "save_stl",
    "shrink_ball",
    "shrink_balls",
    "split_components",
    "validate_mesh",
    "vote_inside",
    "winding_number",
]
