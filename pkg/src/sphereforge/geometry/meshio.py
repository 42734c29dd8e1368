"""OBJ and STL reading/writing."""

import logging
import os
import struct

import numpy as np

from ..errors import MalformedMesh, UnsupportedFormat
from .mesh import TriangleMesh

log = logging.getLogger(__name__)

WELD_TOLERANCE = 1e-9
DEGENERATE_AREA = 1e-12


def load_mesh(path):
    """Read an OBJ or STL file into a triangulated :class:`TriangleMesh`.

    The format comes from the extension, or from the content when the
    extension is unknown. Polygons are fan-triangulated, STL corners are
    welded at 1e-9 m and zero-area faces are dropped.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError(path)
    with open(path, "rb") as fh:
        data = fh.read()
    kind = _detect(path, data)
    try:
        if kind == "obj":
            verts, faces = _parse_obj(data)
        elif kind == "stl-binary":
            verts, faces = _parse_stl_binary(data)
        else:
            verts, faces = _parse_stl_ascii(data)
    except (ValueError, IndexError, struct.error, UnicodeDecodeError) as exc:
        raise MalformedMesh(f"{path}: {exc}") from exc
    if kind.startswith("stl"):
        verts, faces = weld(verts, faces, WELD_TOLERANCE)
    return _finish(verts, faces, path)


def _detect(path, data):
    ext = os.path.splitext(path)[1].lower()
    if ext == ".obj":
        return "obj"
    if ext == ".stl":
        return "stl-binary" if _is_binary_stl(data) else "stl-ascii"
    head = data[:512].lstrip()
    if _is_binary_stl(data):
        return "stl-binary"
    if head.startswith(b"solid") and b"facet" in data[:4096]:
        return "stl-ascii"
    text = head.decode("ascii", errors="replace")
    if any(line.split()[:1] in (["v"], ["f"], ["vn"], ["#"], ["o"], ["g"]) for line in text.splitlines()):
        return "obj"
    raise UnsupportedFormat(f"cannot determine mesh format of {path}")


def _is_binary_stl(data):
    if len(data) < 84:
        return False
    (n,) = struct.unpack_from("<I", data, 80)
    if len(data) != 84 + 50 * n:
        return False
    # an ASCII file whose size happens to match still has to look like text
    return not (data[:5] == b"solid" and b"facet" in data[:4096] and b"\x00" not in data[84:200])


def _parse_obj(data):
    verts, faces = [], []
    for raw in data.decode("utf-8", errors="strict").splitlines():
        parts = raw.split("#", 1)[0].split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            idx = []
            for tok in parts[1:]:
                i = int(tok.split("/")[0])
                idx.append(i - 1 if i > 0 else len(verts) + i)
            if len(idx) < 3:
                raise ValueError(f"face with {len(idx)} vertices")
            for k in range(1, len(idx) - 1):
                faces.append([idx[0], idx[k], idx[k + 1]])
    v = np.array(verts, dtype=float).reshape(-1, 3)
    f = np.array(faces, dtype=np.int64).reshape(-1, 3)
    if len(f) and (f.min() < 0 or f.max() >= len(v)):
        raise ValueError("face index out of range")
    return v, f


def _parse_stl_binary(data):
    (n,) = struct.unpack_from("<I", data, 80)
    rec = np.dtype([("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    arr = np.frombuffer(data, dtype=rec, count=n, offset=84)
    tris = arr["v"].astype(np.float64)
    return tris.reshape(-1, 3), np.arange(3 * n).reshape(-1, 3)


def _parse_stl_ascii(data):
    pts = []
    for line in data.decode("ascii").splitlines():
        parts = line.split()
        if parts and parts[0] == "vertex":
            pts.append([float(x) for x in parts[1:4]])
    if len(pts) % 3:
        raise ValueError("vertex count is not a multiple of three")
    v = np.array(pts, dtype=float).reshape(-1, 3)
    return v, np.arange(len(v)).reshape(-1, 3)


def weld(verts, faces, tol):
    """Merge vertices that agree within ``tol`` (grid snapping)."""
    if not len(verts):
        return verts, faces
    key = np.round(verts / tol).astype(np.int64)
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    # keep first-occurrence order so output is stable
    order = np.argsort(first)
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    return verts[first[order]], rank[inverse.reshape(-1)][faces]


def _finish(verts, faces, path):
    if not len(faces):
        raise MalformedMesh(f"{path}: no faces")
    if not np.all(np.isfinite(verts)):
        raise MalformedMesh(f"{path}: non-finite coordinates")
    tri = verts[faces]
    area = 0.5 * np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    repeated = (faces[:, 0] == faces[:, 1]) | (faces[:, 1] == faces[:, 2]) | (faces[:, 0] == faces[:, 2])
    bad = repeated | (area <= DEGENERATE_AREA)
    dropped = int(bad.sum())
    if dropped:
        log.warning("%s: dropped %d degenerate face(s)", path, dropped)
    faces = faces[~bad]
    if not len(faces):
        raise MalformedMesh(f"{path}: every face is degenerate")
    mesh = TriangleMesh(verts, faces)
    mesh.dropped_faces = dropped
    return mesh


def format_float(x):
    """Shortest decimal that round-trips to the same double."""
    r = repr(float(x))
    return "0" if r == "-0.0" or r == "0.0" else (r[:-2] if r.endswith(".0") else r)


def save_obj(mesh, path):
    lines = [f"v {format_float(x)} {format_float(y)} {format_float(z)}" for x, y, z in mesh.vertices]
    lines += [f"f {a + 1} {b + 1} {c + 1}" for a, b, c in mesh.faces]
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def save_stl(mesh, path, ascii=False):
    tri = mesh.triangles
    normals = mesh.face_normals
    if ascii:
        out = ["solid mesh"]
        for n, t in zip(normals, tri):
            out.append(f"  facet normal {n[0]:.9g} {n[1]:.9g} {n[2]:.9g}")
            out.append("    outer loop")
            out.extend("      vertex " + " ".join(format_float(x) for x in p) for p in t)
            out.append("    endloop")
            out.append("  endfacet")
        out.append("endsolid mesh")
        with open(path, "w") as fh:
            fh.write("\n".join(out) + "\n")
        return
    rec = np.zeros(len(tri), dtype=[("normal", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])
    rec["normal"] = normals
    rec["v"] = tri
    with open(path, "wb") as fh:
        fh.write(b"binary stl".ljust(80, b"\0"))
        fh.write(struct.pack("<I", len(tri)))
        fh.write(rec.tobytes())
