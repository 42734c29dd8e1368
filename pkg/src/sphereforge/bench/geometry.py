"""Posed link geometry and the collision / distance queries."""

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..errors import StructureMismatch
from ..geometry.mesh import TriangleMesh
from ..geometry.shapes import icosphere
from ..geometry.spheres import SphereSet
from ..urdf.kinematics import link_matrices
from ..urdf.model import resolve_uri
from ..urdf.spherize import primitive_mesh


@dataclass
class LinkGeometry:
    """Collision geometry of one link in its own frame: a mesh with its
    BVH, or a sphere set."""

    name: str
    mesh: TriangleMesh = None
    spheres: SphereSet = None

    @property
    def is_spheres(self):
        return self.spheres is not None

    def __post_init__(self):
        if (self.mesh is None) == (self.spheres is None):
            raise ValueError("link geometry is either a mesh or a sphere set")
        if self.mesh is not None:
            self.bvh = self.mesh.bvh
        else:
            self.centers = np.ascontiguousarray(self.spheres.centers)
            self.radii = np.ascontiguousarray(self.spheres.radii)


class PosedGeometry:
    """Every link with collision geometry, placed by a link-pose map."""

    def __init__(self, links, poses=None):
        self.links = list(links)
        self.poses = {}
        if poses is not None:
            self.set_poses(poses)

    @property
    def names(self):
        return [g.name for g in self.links]

    def set_poses(self, poses):
        """``poses`` maps link name to a 4x4 matrix or a Pose."""
        self.poses = {}
        for g in self.links:
            m = poses[g.name]
            m = m.matrix if hasattr(m, "matrix") else np.asarray(m, dtype=float)
            self.poses[g.name] = (np.ascontiguousarray(m[:3, :3]), np.ascontiguousarray(m[:3, 3]))
        return self

    def _pose(self, g):
        return self.poses.get(g.name) or (np.eye(3), np.zeros(3))


def _link_mesh(model, link, search_paths):
    from ..geometry.meshio import load_mesh

    parts = []
    for geom in link.collisions:
        if geom.kind == "mesh":
            path = resolve_uri(geom.filename, model.base_dir, search_paths)
            if path is None:
                from ..urdf.model import get_urdf_meshes

                get_urdf_meshes(model, search_paths)
            mesh = load_mesh(path).scaled(geom.scale)
        elif geom.kind == "sphere":
            mesh = icosphere(3, geom.get("radius"))
        else:
            mesh = primitive_mesh(geom)
        parts.append(mesh if geom.origin.is_identity else mesh.transformed(geom.origin.matrix))
    return TriangleMesh.concatenate(parts)


def model_geometry(model, search_paths=None):
    """Per-link geometry for a robot model.

    Links whose collisions are all spheres become sphere sets; any other
    link becomes one mesh (primitives tessellated) with a BVH.
    """
    paths = model.search_paths if search_paths is None else tuple(search_paths)
    out = []
    for link in model.links.values():
        if not link.collisions:
            continue
        if all(g.kind == "sphere" for g in link.collisions):
            centers = [g.origin.xyz for g in link.collisions]
            radii = [g.get("radius") for g in link.collisions]
            out.append(LinkGeometry(link.name, spheres=SphereSet(centers, radii)))
        else:
            out.append(LinkGeometry(link.name, mesh=_link_mesh(model, link, paths)))
    return PosedGeometry(out)


def check_structure(a, b):
    """Raise unless two models share links and joints."""
    if list(a.links) != list(b.links):
        raise StructureMismatch("models have different links")
    ja = [(j.name, j.kind, j.parent, j.child) for j in a.joints]
    jb = [(j.name, j.kind, j.parent, j.child) for j in b.joints]
    if ja != jb:
        raise StructureMismatch("models have different joints")


def pose_geometry(geom, model, q):
    return geom.set_poses(link_matrices(model, q))


def check_collision(geom, env, backend=None, solid=False):
    """True when any link touches any obstacle.

    Meshes are tested triangle by triangle through their BVH (surface
    contact); sphere sets in closed form. With ``solid`` a mesh also
    collides with obstacles fully inside it.
    """
    k = kernels if backend is None else kernels.get_backend(backend)
    args = env.kernel_args
    for g in geom.links:
        rot, trans = geom._pose(g)
        if g.is_spheres:
            hit = k.spheres_env_collide(g.centers, g.radii, rot, trans, *args)
        else:
            hit = k.mesh_env_collide(*g.bvh.arrays, solid, rot, trans, *args)
        if hit:
            return True
    return False


def distance_query(geom, env, backend=None, solid=False):
    """Smallest link-obstacle separation.

    Sphere sets report exact signed values (negative inside). Meshes
    report 0 on contact. An empty environment gives ``inf``.
    """
    k = kernels if backend is None else kernels.get_backend(backend)
    args = env.kernel_args
    best = np.inf
    for g in geom.links:
        rot, trans = geom._pose(g)
        if g.is_spheres:
            d = k.spheres_env_distance(g.centers, g.radii, rot, trans, *args)
        else:
            d = k.mesh_env_distance(*g.bvh.arrays, solid, rot, trans, *args)
        best = min(best, float(d))
    return best
