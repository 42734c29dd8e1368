"""Spherizing whole robots: primitives analytically or by tessellation,
meshes through the full pipeline, plus the link-keyed sphere database."""

import json

import numpy as np

from ..geometry import shapes
from ..geometry.spheres import SphereSet
from ..spherize import SpherizationConfig, spherize_grid, spherize_medial, spherize_mesh
from ..spherize.tree import sphere_records, spheres_from_records
from .model import get_urdf_meshes, resolve_uri, set_urdf_spheres

CYLINDER_SEGMENTS = 32


def primitive_mesh(geom):
    """Watertight tessellation of a box or cylinder in its local frame."""
    if geom.kind == "box":
        return shapes.box(geom.get("size"))
    if geom.kind == "cylinder":
        return shapes.cylinder(geom.get("radius"), geom.get("length"), CYLINDER_SEGMENTS)
    raise ValueError(f"no tessellation for {geom.kind!r}")


def spherize_primitive(geom, config=None):
    """Spheres for a sphere, box or cylinder collision, in the link frame."""
    config = config or SpherizationConfig()
    if geom.kind == "sphere":
        local = SphereSet([(0.0, 0.0, 0.0)], [geom.get("radius")])
    elif geom.kind in ("box", "cylinder"):
        mesh = primitive_mesh(geom)
        if config.method == "grid":
            local = spherize_grid(mesh, mesh.bvh, config.grid_resolution, config.seed)
        else:
            local = spherize_medial(mesh, mesh.bvh, config).leaves
    else:
        raise ValueError(f"{geom.kind!r} is not a primitive")
    return local if geom.origin.is_identity else local.transformed(geom.origin.matrix)


def spherize_collision(model, link, index, geom, sph_config=None, proc_config=None, search_paths=None):
    """Spheres for one collision element, in the link frame, with the
    coverage report (``None`` for primitives)."""
    if geom.kind != "mesh":
        return spherize_primitive(geom, sph_config), None
    from ..geometry.meshio import load_mesh

    paths = model.search_paths if search_paths is None else tuple(search_paths)
    path = resolve_uri(geom.filename, model.base_dir, paths)
    if path is None:
        get_urdf_meshes(model, paths)  # raises with the full list
    mesh = load_mesh(path).scaled(geom.scale)
    tree = spherize_mesh(mesh, sph_config, proc_config)
    leaves = tree.leaves
    if not geom.origin.is_identity:
        leaves = leaves.transformed(geom.origin.matrix)
    return leaves, tree.coverage


def spherize_robot(model, sph_config=None, proc_config=None, search_paths=None, on_collision=None):
    """Spheres per link for every link with collision geometry.

    Each collision element is fitted on its own with the configured
    budget; a link's set is their concatenation in document order.
    Unresolvable meshes are reported together before any fitting starts.
    ``on_collision(link, index, spheres, coverage)`` is called after each
    element.
    """
    get_urdf_meshes(model, search_paths)
    out = {}
    for link in model.links.values():
        if not link.collisions:
            continue
        parts = []
        for i, geom in enumerate(link.collisions):
            spheres, cov = spherize_collision(model, link.name, i, geom, sph_config, proc_config, search_paths)
            if on_collision is not None:
                on_collision(link.name, i, spheres, cov)
            parts.append(spheres)
        out[link.name] = SphereSet.concatenate(parts)
    return out


def spherize_urdf(model, sph_config=None, proc_config=None, search_paths=None):
    """The model with every collision replaced by spheres, and the map."""
    spheres = spherize_robot(model, sph_config, proc_config, search_paths)
    return set_urdf_spheres(model, spheres), spheres


def database_to_json(spheres_by_link):
    """``{"<link>": {"spheres": [...]}}`` in document order."""
    doc = {name: {"spheres": sphere_records(s)} for name, s in spheres_by_link.items()}
    return json.dumps(doc, indent=2) + "\n"


def database_from_json(text):
    doc = json.loads(text)
    if not isinstance(doc, dict):
        raise ValueError("sphere database must be a JSON object keyed by link")
    return {name: spheres_from_records(entry.get("spheres", [])) for name, entry in doc.items()}


def collision_spheres(model):
    """Sphere collisions already present in a model, per link, in the
    link frame. Links whose collisions are not all spheres are skipped."""
    out = {}
    for link in model.links.values():
        cols = link.collisions
        if cols and all(g.kind == "sphere" for g in cols):
            centers = np.array([g.origin.xyz for g in cols])
            out[link.name] = SphereSet(centers, [g.get("radius") for g in cols])
    return out
