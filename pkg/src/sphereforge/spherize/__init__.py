"""Sphere covers for meshes."""

import numpy as np

from ..geometry.mesh import validate_mesh
from ..preprocess import ProcessConfig, process_mesh
from .config import SpherizationConfig
from .coverage import CoverageReport, close_coverage, fidelity_report, verify_coverage
from .grid import spherize_grid
from .medial import spherize_medial
from .tree import SphereTree, spheres_from_json, spheres_to_json

_VERIFY_SEED_OFFSET = 7919


def _fit(processed, original, config):
    if config.method == "grid":
        spheres = spherize_grid(processed, processed.bvh, config.grid_resolution, config.seed)
        tree = SphereTree([spheres], method="grid", seed=config.seed)
    else:
        tree = spherize_medial(processed, processed.bvh, config)
    if config.expand and config.method == "medial" and original is not processed:
        # the processed surface is offset outward, but close any gap to the
        # input surface too
        leaves = tree.leaves
        tree.levels[-1] = type(leaves)(leaves.centers, close_coverage(original, leaves.centers, leaves.radii))
    return tree


def spherize_mesh(mesh, sph_config=None, proc_config=None, preprocess=True, stages=None):
    """Preprocess ``mesh`` and cover it with spheres.

    With ``verify`` the leaves are checked on fresh surface samples of the
    input; if coverage falls short of ``1 - min_samples / num_samples`` the
    fit is repeated once with ``branch`` doubled. The grid method skips
    preprocessing for inputs that are already watertight. The final report is
    attached as ``tree.coverage``.
    """
    cfg = sph_config or SpherizationConfig()
    if cfg.method == "grid" and validate_mesh(mesh).watertight:
        # the grid's surface band already copes with thin parts; remeshing
        # would only shift the grid origin
        preprocess = False
    processed = process_mesh(mesh, proc_config or ProcessConfig(seed=cfg.seed), stages) if preprocess else mesh
    tree = _fit(processed, mesh, cfg)
    if cfg.verify:
        vseed = cfg.seed + _VERIFY_SEED_OFFSET
        report = verify_coverage(mesh, tree.leaves, cfg.num_samples, vseed)
        if report.fraction_covered < 1.0 - cfg.min_samples / cfg.num_samples and cfg.method == "medial":
            tree = _fit(processed, mesh, cfg.replace(branch=2 * cfg.branch))
            report = verify_coverage(mesh, tree.leaves, cfg.num_samples, vseed)
        tree.coverage = report
    return tree


__all__ = [
    "CoverageReport",
    "SphereTree",
    "SpherizationConfig",
    "fidelity_report",
    "spheres_from_json",
    "spheres_to_json",
    "spherize_grid",
    "spherize_medial",
    "spherize_mesh",
    "verify_coverage",
]
