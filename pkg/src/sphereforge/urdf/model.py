"""URDF parsing, collision rewriting and serialisation.

The parsed document is kept alongside the typed model. Rewrites edit a
copy of that document, so visual, inertial, transmission and unknown tags
pass through untouched, and attribute order and comments survive.
"""

from __future__ import annotations

import copy
import math
import os
import tempfile
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

from ..errors import KinematicLoop, MeshNotFound, MissingLink, UnknownLink, UnsupportedJoint, XmlError
from ..geometry.meshio import format_float, load_mesh
from .pose import IDENTITY, Pose

JOINT_KINDS = ("fixed", "revolute", "continuous", "prismatic")
PRIMITIVES = ("sphere", "box", "cylinder")


@dataclass(frozen=True)
class CollisionGeometry:
    """One ``<collision>``: ``kind`` is mesh, sphere, box or cylinder.

    ``params`` holds ``filename``/``scale`` for meshes, ``radius`` for
    spheres, ``size`` for boxes and ``radius``/``length`` for cylinders.
    """

    kind: str
    params: tuple
    origin: Pose = IDENTITY

    def get(self, key):
        return dict(self.params)[key]

    @property
    def filename(self):
        return self.get("filename")

    @property
    def scale(self):
        return self.get("scale")


@dataclass(frozen=True)
class Link:
    name: str
    collisions: tuple = ()


@dataclass(frozen=True)
class Joint:
    name: str
    kind: str
    parent: str
    child: str
    origin: Pose = IDENTITY
    axis: tuple = (1.0, 0.0, 0.0)
    limits: tuple = None

    @property
    def movable(self):
        return self.kind != "fixed"

    def sample_range(self):
        """Interval used when drawing random configurations."""
        if self.limits is not None:
            return self.limits
        return (-math.pi, math.pi) if self.kind == "continuous" else (0.0, 0.0)


@dataclass
class RobotModel:
    name: str
    links: dict
    joints: list
    root_link: str
    document: ET.ElementTree = field(repr=False, compare=False)
    base_dir: str = field(default=".", compare=False)
    search_paths: tuple = field(default=(), compare=False)

    @property
    def joint_map(self):
        return {j.name: j for j in self.joints}

    def child_joints(self, link):
        return [j for j in self.joints if j.parent == link]

    def structure(self):
        """Everything load/save must preserve, as comparable plain data."""
        preserved = []
        for el in self.document.getroot().iter("link"):
            for sub in el:
                if sub.tag != "collision":
                    preserved.append((el.get("name"), _canon(sub)))
        return (
            self.name,
            tuple((l.name, l.collisions) for l in self.links.values()),
            tuple(self.joints),
            self.root_link,
            tuple(preserved),
        )

    def __eq__(self, other):
        if not isinstance(other, RobotModel):
            return NotImplemented
        return self.structure() == other.structure()

    __hash__ = None


def _canon(el):
    el = copy.deepcopy(el)
    for e in el.iter():
        e.tail = None
        if e.text is not None and not e.text.strip():
            e.text = None
    return ET.tostring(el, encoding="unicode")


def _floats(text, n, what):
    try:
        vals = tuple(float(v) for v in text.split())
    except (AttributeError, ValueError) as exc:
        raise XmlError(f"bad {what}: {text!r}") from exc
    if len(vals) != n or not all(map(math.isfinite, vals)):
        raise XmlError(f"{what} needs {n} finite numbers, got {text!r}")
    return vals


def _pose(el):
    if el is None:
        return IDENTITY
    xyz = _floats(el.get("xyz", "0 0 0"), 3, "origin xyz")
    rpy = _floats(el.get("rpy", "0 0 0"), 3, "origin rpy")
    return Pose(xyz, rpy)


def _positive(value, what):
    if not value > 0:
        raise XmlError(f"{what} must be positive")
    return value


def _collision(el, link):
    geom = el.find("geometry")
    if geom is None or len(geom) == 0:
        raise XmlError(f"link {link!r}: collision without geometry")
    shape = geom[0]
    origin = _pose(el.find("origin"))
    if shape.tag == "mesh":
        fn = shape.get("filename", "")
        if not fn:
            raise XmlError(f"link {link!r}: mesh without filename")
        scale = _floats(shape.get("scale", "1 1 1"), 3, "mesh scale")
        return CollisionGeometry("mesh", (("filename", fn), ("scale", scale)), origin)
    if shape.tag == "sphere":
        r = _positive(_floats(shape.get("radius"), 1, "sphere radius")[0], "sphere radius")
        return CollisionGeometry("sphere", (("radius", r),), origin)
    if shape.tag == "box":
        size = _floats(shape.get("size"), 3, "box size")
        if min(size) <= 0:
            raise XmlError(f"link {link!r}: box size must be positive")
        return CollisionGeometry("box", (("size", size),), origin)
    if shape.tag == "cylinder":
        r = _positive(_floats(shape.get("radius"), 1, "cylinder radius")[0], "cylinder radius")
        length = _positive(_floats(shape.get("length"), 1, "cylinder length")[0], "cylinder length")
        return CollisionGeometry("cylinder", (("radius", r), ("length", length)), origin)
    raise XmlError(f"link {link!r}: unsupported collision geometry <{shape.tag}>")


def _joint(el):
    name = el.get("name")
    kind = el.get("type")
    if not name:
        raise XmlError("joint without name")
    if kind not in JOINT_KINDS:
        if kind in ("planar", "floating"):
            raise UnsupportedJoint(f"joint {name!r}: type {kind!r} is not supported")
        raise XmlError(f"joint {name!r}: unknown type {kind!r}")
    parent, child = el.find("parent"), el.find("child")
    if parent is None or child is None or not parent.get("link") or not child.get("link"):
        raise XmlError(f"joint {name!r}: needs parent and child links")
    axis = (1.0, 0.0, 0.0)
    if el.find("axis") is not None:
        axis = _floats(el.find("axis").get("xyz", "1 0 0"), 3, "axis")
    if kind != "fixed":
        norm = math.sqrt(sum(a * a for a in axis))
        if norm == 0:
            raise XmlError(f"joint {name!r}: zero axis")
        axis = tuple(a / norm for a in axis)
    limits = None
    if kind in ("revolute", "prismatic"):
        lim = el.find("limit")
        if lim is None:
            raise XmlError(f"joint {name!r}: {kind} joint needs <limit>")
        lo = _floats(lim.get("lower", "0"), 1, "limit lower")[0]
        hi = _floats(lim.get("upper", "0"), 1, "limit upper")[0]
        if lo > hi:
            raise XmlError(f"joint {name!r}: lower limit above upper")
        limits = (lo, hi)
    if parent.get("link") == child.get("link"):
        raise KinematicLoop(f"joint {name!r} connects {parent.get('link')!r} to itself")
    return Joint(name, kind, parent.get("link"), child.get("link"), _pose(el.find("origin")), axis, limits)


def _parse_document(tree, base_dir, search_paths):
    root = tree.getroot()
    if root.tag != "robot":
        raise XmlError(f"root element is <{root.tag}>, expected <robot>")
    links = {}
    for el in root.findall("link"):
        name = el.get("name")
        if not name:
            raise XmlError("link without name")
        if name in links:
            raise XmlError(f"duplicate link {name!r}")
        links[name] = Link(name, tuple(_collision(c, name) for c in el.findall("collision")))
    if not links:
        raise XmlError("robot has no links")
    joints = [_joint(el) for el in root.findall("joint")]
    if len({j.name for j in joints}) != len(joints):
        raise XmlError("duplicate joint names")
    for j in joints:
        for end in (j.parent, j.child):
            if end not in links:
                raise MissingLink(f"joint {j.name!r} references missing link {end!r}")
    parents = {}
    for j in joints:
        if j.child in parents:
            raise KinematicLoop(f"link {j.child!r} has two parent joints")
        parents[j.child] = j.parent
    roots = [n for n in links if n not in parents]
    if len(roots) != 1:
        raise KinematicLoop(f"joint graph is not a tree: {len(roots)} root links")
    # every link must reach the root without revisiting
    for start in links:
        seen, cur = set(), start
        while cur in parents:
            if cur in seen:
                raise KinematicLoop(f"cycle through link {cur!r}")
            seen.add(cur)
            cur = parents[cur]
    return RobotModel(root.get("name", ""), links, joints, roots[0], tree, base_dir, tuple(search_paths))


def _parse_tree(source):
    parser = ET.XMLParser(target=ET.TreeBuilder(insert_comments=True, insert_pis=True))
    try:
        if isinstance(source, str) and source.lstrip().startswith("<"):
            parser.feed(source)
            return ET.ElementTree(parser.close())
        return ET.parse(source, parser=parser)
    except ET.ParseError as exc:
        raise XmlError(str(exc)) from exc


def load_urdf(path, search_paths=()):
    """Parse a URDF file into a :class:`RobotModel`."""
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    tree = _parse_tree(path)
    return _parse_document(tree, os.path.dirname(os.path.abspath(path)), search_paths)


def parse_urdf(text, base_dir=".", search_paths=()):
    """Like :func:`load_urdf` for an XML string."""
    return _parse_document(_parse_tree(text), os.path.abspath(base_dir), search_paths)


# -- mesh references ---------------------------------------------------------


def resolve_uri(uri, base_dir, search_paths=()):
    """Absolute path for a mesh URI, or ``None``.

    Tried in order: absolute path, relative to the URDF's directory, then
    each search path. ``package://pkg/rest`` is looked up as ``pkg/rest``
    and as ``rest`` under each of those roots.
    """
    if uri.startswith("file://"):
        uri = uri[len("file://"):]
    if uri.startswith("package://"):
        rel = uri[len("package://"):]
        pkg, _, rest = rel.partition("/")
        tails = [rel, rest] if rest else [rel]
    else:
        if os.path.isabs(uri):
            return uri if os.path.isfile(uri) else None
        tails = [uri]
    for root in (base_dir, *search_paths):
        for tail in tails:
            cand = os.path.join(root, tail)
            if os.path.isfile(cand):
                return os.path.abspath(cand)
    return None


@dataclass(frozen=True)
class MeshRef:
    link: str
    path: str
    scale: tuple
    origin: Pose
    index: int  # position among the link's collision elements

    def __iter__(self):
        return iter((self.link, self.path, self.scale, self.origin))

    def load(self):
        """The referenced mesh with its scale applied (meters)."""
        return load_mesh(self.path).scaled(self.scale)


def get_urdf_meshes(model, search_paths=None):
    """One entry per mesh collision, in document order."""
    paths = model.search_paths if search_paths is None else tuple(search_paths)
    out, missing = [], []
    for link in model.links.values():
        for i, geom in enumerate(link.collisions):
            if geom.kind != "mesh":
                continue
            resolved = resolve_uri(geom.filename, model.base_dir, paths)
            if resolved is None:
                missing.append((link.name, geom.filename))
            else:
                out.append(MeshRef(link.name, resolved, geom.scale, geom.origin, i))
    if missing:
        raise MeshNotFound(missing)
    return out


# -- rewriting -----------------------------------------------------------------


def _sphere_collision(center, radius):
    col = ET.Element("collision")
    ET.SubElement(col, "origin", {
        "xyz": " ".join(format_float(v) for v in center),
        "rpy": "0 0 0",
    })
    geom = ET.SubElement(col, "geometry")
    ET.SubElement(geom, "sphere", {"radius": format_float(radius)})
    return col


def set_urdf_spheres(model, spheres_by_link):
    """New model whose keyed links carry one sphere collision per sphere.

    Spheres are in the link frame. Links not in the map keep their
    collisions, everything else in the document is carried over.
    """
    for name in spheres_by_link:
        if name not in model.links:
            raise UnknownLink(f"no link named {name!r}")
    tree = copy.deepcopy(model.document)
    for el in tree.getroot().findall("link"):
        name = el.get("name")
        if name not in spheres_by_link:
            continue
        children = list(el)
        cols = [c for c in children if c.tag == "collision"]
        at = children.index(cols[0]) if cols else len(children)
        for c in cols:
            el.remove(c)
        spheres = spheres_by_link[name]
        for k, (c, r) in enumerate(zip(spheres.centers, spheres.radii)):
            el.insert(at + k, _sphere_collision(c, r))
    return _parse_document(tree, model.base_dir, model.search_paths)


def urdf_to_string(model):
    """Canonical text: 2-space indentation, source attribute order."""
    root = copy.deepcopy(model.document.getroot())
    ET.indent(root, space="  ")
    return '<?xml version="1.0"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def atomic_write(path, data, mode="w"):
    """Write through a temporary file in the target directory and rename,
    so readers never see a partial file."""
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_urdf(model, path):
    atomic_write(path, urdf_to_string(model))


def count_collision_meshes(model):
    return sum(1 for link in model.links.values() for g in link.collisions if g.kind == "mesh")


def link_spheres_in_frame(spheres, origin):
    """Spheres given in a collision frame, expressed in the link frame."""
    return spheres.transformed(origin.matrix) if not origin.is_identity else spheres


__all__ = [
    "CollisionGeometry",
    "Joint",
    "Link",
    "MeshRef",
    "RobotModel",
    "atomic_write",
    "count_collision_meshes",
    "get_urdf_meshes",
    "load_urdf",
    "parse_urdf",
    "resolve_uri",
    "save_urdf",
    "set_urdf_spheres",
    "urdf_to_string",
]
