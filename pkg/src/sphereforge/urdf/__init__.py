"""Robot descriptions: parsing, kinematics and collision rewriting."""

from .kinematics import config_hash, forward_kinematics, link_matrices, movable_joints, random_configuration
from .model import (
    CollisionGeometry,
    Joint,
    Link,
    MeshRef,
    RobotModel,
    atomic_write,
    count_collision_meshes,
    get_urdf_meshes,
    load_urdf,
    parse_urdf,
    resolve_uri,
    save_urdf,
    set_urdf_spheres,
    urdf_to_string,
)
from .pose import IDENTITY, Pose, axis_angle, matrix_rpy, rpy_matrix
from .spherize import (
    collision_spheres,
    database_from_json,
    database_to_json,
    primitive_mesh,
    spherize_collision,
    spherize_primitive,
    spherize_robot,
    spherize_urdf,
)

__all__ = [
    "IDENTITY",
    "CollisionGeometry",
    "Joint",
    "Link",
    "MeshRef",
    "Pose",
    "RobotModel",
    "atomic_write",
    "axis_angle",
    "collision_spheres",
    "config_hash",
    "count_collision_meshes",
    "database_from_json",
    "database_to_json",
    "forward_kinematics",
    "get_urdf_meshes",
    "link_matrices",
    "load_urdf",
    "matrix_rpy",
    "movable_joints",
    "parse_urdf",
    "primitive_mesh",
    "random_configuration",
    "resolve_uri",
    "rpy_matrix",
    "save_urdf",
    "set_urdf_spheres",
    "spherize_collision",
    "spherize_primitive",
    "spherize_robot",
    "spherize_urdf",
    "urdf_to_string",
]
