"""Timed comparison of a mesh model against its sphere model."""

import csv
import io
import time
from dataclasses import asdict, dataclass

import numpy as np

from ..errors import StructureMismatch
from ..urdf.kinematics import config_hash, link_matrices, random_configuration
from .environment import generate_environment
from .geometry import check_collision, check_structure, distance_query, model_geometry

WARMUP = 100
OBSTACLES_PER_ENV = 5
REACH_SAMPLES = 64
BOUNDS_PAD = 0.5

CSV_FIELDS = (
    "query_id", "config_hash", "mesh_collision", "sphere_collision",
    "mesh_time_ns", "sphere_time_ns", "mesh_dist", "sphere_dist",
    "mesh_dist_time_ns", "sphere_dist_time_ns",
)


@dataclass(frozen=True)
class QueryRecord:
    query_id: int
    config_hash: str
    mesh_collision: bool
    sphere_collision: bool
    mesh_time_ns: int  # collision check
    sphere_time_ns: int
    mesh_dist: float
    sphere_dist: float
    mesh_dist_time_ns: int
    sphere_dist_time_ns: int


@dataclass(frozen=True)
class BenchReport:
    """Mean query times in seconds; deltas are spheres minus mesh.

    ``validity_diff_percent`` is (sphere collisions - mesh collisions) /
    n_queries * 100, positive when the spheres report more collisions.
    """

    n_queries: int
    mean_collision_time_mesh: float
    mean_collision_time_spheres: float
    mean_distance_time_mesh: float
    mean_distance_time_spheres: float
    delta_collision: float
    delta_distance: float
    validity_diff_percent: float

    @classmethod
    def from_records(cls, records):
        records = list(records)
        n = len(records)
        if n < 1:
            raise ValueError("a report needs at least one query")

        def mean_s(key):
            return float(np.mean([getattr(r, key) for r in records])) * 1e-9

        cm, cs = mean_s("mesh_time_ns"), mean_s("sphere_time_ns")
        dm, ds = mean_s("mesh_dist_time_ns"), mean_s("sphere_dist_time_ns")
        diff = sum(r.sphere_collision for r in records) - sum(r.mesh_collision for r in records)
        return cls(n, cm, cs, dm, ds, cs - cm, ds - dm, 100.0 * diff / n)

    def to_dict(self):
        return asdict(self)

    def table(self):
        """Aligned text table with millisecond deltas and the % Diff."""
        head = ("Queries", "Δ Col. (ms)", "Δ Dis. (ms)", "% Diff.")
        row = (
            str(self.n_queries),
            f"{self.delta_collision * 1e3:.5f}",
            f"{self.delta_distance * 1e3:.5f}",
            f"{self.validity_diff_percent:.5f}%",
        )
        widths = [max(len(a), len(b)) for a, b in zip(head, row)]
        lines = ["  ".join(h.rjust(w) for h, w in zip(head, widths)),
                 "  ".join(v.rjust(w) for v, w in zip(row, widths))]
        detail = [
            ("mesh collision (ms)", self.mean_collision_time_mesh),
            ("sphere collision (ms)", self.mean_collision_time_spheres),
            ("mesh distance (ms)", self.mean_distance_time_mesh),
            ("sphere distance (ms)", self.mean_distance_time_spheres),
        ]
        lines.append("")
        lines += [f"{k:<22} {v * 1e3:.5f}" for k, v in detail]
        return "\n".join(lines) + "\n"


def records_to_csv(records):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in records:
        w.writerow([
            r.query_id, r.config_hash, int(r.mesh_collision), int(r.sphere_collision),
            r.mesh_time_ns, r.sphere_time_ns, repr(r.mesh_dist), repr(r.sphere_dist),
            r.mesh_dist_time_ns, r.sphere_dist_time_ns,
        ])
    return buf.getvalue()


def records_from_csv(text):
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(QueryRecord(
            int(row["query_id"]), row["config_hash"],
            row["mesh_collision"] == "1", row["sphere_collision"] == "1",
            int(row["mesh_time_ns"]), int(row["sphere_time_ns"]),
            float(row["mesh_dist"]), float(row["sphere_dist"]),
            int(row["mesh_dist_time_ns"]), int(row["sphere_dist_time_ns"]),
        ))
    return out


def workspace_bounds(model, geometry, rng, samples=REACH_SAMPLES, pad=BOUNDS_PAD):
    """Box around the geometry swept over random configurations."""
    lo, hi = np.full(3, np.inf), np.full(3, -np.inf)
    for _ in range(samples):
        mats = link_matrices(model, random_configuration(model, rng))
        for g in geometry.links:
            m = mats[g.name]
            if g.is_spheres:
                c = g.centers @ m[:3, :3].T + m[:3, 3]
                lo = np.minimum(lo, (c - g.radii[:, None]).min(0))
                hi = np.maximum(hi, (c + g.radii[:, None]).max(0))
            else:
                a, b = g.mesh.bounds
                corners = np.array([[b[0] if i & 1 else a[0], b[1] if i & 2 else a[1], b[2] if i & 4 else a[2]]
                                    for i in range(8)]) @ m[:3, :3].T + m[:3, 3]
                lo = np.minimum(lo, corners.min(0))
                hi = np.maximum(hi, corners.max(0))
    if not np.all(np.isfinite(lo)):
        lo, hi = np.full(3, -1.0), np.full(3, 1.0)
    return tuple(lo - pad), tuple(hi + pad)


def run_benchmark(model, spherized, n_queries=1000, n_envs=10, seed=0, obstacles=OBSTACLES_PER_ENV,
                  bounds=None, warmup=WARMUP, backend=None, search_paths=None, solid=False):
    """Time collision and distance queries for both models.

    Queries are spread evenly over ``n_envs`` random environments. Each
    query draws a configuration uniformly within the joint limits, poses
    both models and times all four queries with a monotonic clock.
    ``warmup`` untimed queries run first. Returns ``(report, records)``.
    """
    if n_queries < 1 or n_envs < 1:
        raise ValueError("n_queries and n_envs must be >= 1")
    check_structure(model, spherized)
    mesh_geom = model_geometry(model, search_paths)
    sph_geom = model_geometry(spherized, search_paths)
    if mesh_geom.names != sph_geom.names:
        raise StructureMismatch("models differ in which links carry collision geometry")
    rng = np.random.default_rng(seed)
    if bounds is None:
        bounds = workspace_bounds(model, mesh_geom, rng)
    env_seeds = np.random.SeedSequence(seed).spawn(n_envs)
    envs = [generate_environment(s, obstacles, bounds) for s in env_seeds]

    def one(env, q):
        mats = link_matrices(model, q)
        mesh_geom.set_poses(mats)
        sph_geom.set_poses(mats)
        clock = time.perf_counter_ns
        t0 = clock()
        mc = check_collision(mesh_geom, env, backend, solid)
        t1 = clock()
        sc = check_collision(sph_geom, env, backend)
        t2 = clock()
        md = distance_query(mesh_geom, env, backend, solid)
        t3 = clock()
        sd = distance_query(sph_geom, env, backend)
        t4 = clock()
        return mc, sc, md, sd, t1 - t0, t2 - t1, t3 - t2, t4 - t3

    for i in range(warmup):
        one(envs[i % n_envs], random_configuration(model, rng))

    records = []
    for i in range(n_queries):
        env = envs[i * n_envs // n_queries]
        q = random_configuration(model, rng)
        mc, sc, md, sd, tmc, tsc, tmd, tsd = one(env, q)
        records.append(QueryRecord(
            query_id=i, config_hash=config_hash(q), mesh_collision=mc, sphere_collision=sc,
            mesh_time_ns=tmc, sphere_time_ns=tsc, mesh_dist=md, sphere_dist=sd,
            mesh_dist_time_ns=tmd, sphere_dist_time_ns=tsd,
        ))
    return BenchReport.from_records(records), records
