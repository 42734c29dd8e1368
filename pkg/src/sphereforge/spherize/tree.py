"""Sphere-tree container and the canonical JSON form."""

import json
from dataclasses import dataclass, field

import numpy as np

from ..geometry.spheres import SphereSet
from .coverage import CoverageReport


@dataclass
class SphereTree:
    """Levels of sphere sets, coarse to fine; level k holds at most
    ``branch**k`` spheres and the last level is the usable cover."""

    levels: list
    method: str = "medial"
    seed: int = 0
    coverage: CoverageReport = None
    cover_points: np.ndarray = field(default=None, repr=False)

    @property
    def leaves(self):
        return self.levels[-1] if self.levels else SphereSet()

    def __len__(self):
        return len(self.leaves)

    def to_json(self):
        return spheres_to_json(self.leaves, self.method, self.seed, self.coverage)


def _coverage_dict(report):
    if report is None:
        return {}
    return {k: float(v) if isinstance(v, float) else v for k, v in report.to_dict().items()}


def sphere_records(spheres):
    """Canonically ordered ``{"center", "radius"}`` dicts."""
    c = spheres.canonical()
    return [{"center": [float(x) for x in ctr], "radius": float(r)} for ctr, r in zip(c.centers, c.radii)]


def spheres_to_json(spheres, method, seed, coverage=None):
    """Serialise a cover with keys ``spheres``, ``method``, ``seed``,
    ``coverage`` in that order; floats print as shortest round-trip
    decimals and spheres are sorted by (x, y, z, radius)."""
    doc = {
        "spheres": sphere_records(spheres),
        "method": method,
        "seed": int(seed),
        "coverage": _coverage_dict(coverage),
    }
    return json.dumps(doc, indent=2) + "\n"


def spheres_from_records(records):
    if not records:
        return SphereSet()
    centers = [r["center"] for r in records]
    radii = [r["radius"] for r in records]
    return SphereSet(centers, radii)


def spheres_from_json(text):
    """Inverse of :func:`spheres_to_json`; returns ``(SphereSet, doc)``."""
    doc = json.loads(text)
    return spheres_from_records(doc.get("spheres", [])), doc
