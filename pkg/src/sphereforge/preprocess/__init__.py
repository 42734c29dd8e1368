"""Mesh preparation: watertight remesh, simplification, smoothing."""

from .config import ProcessConfig
from .simplify import simplify_qem
from .smooth import smooth_manifold
from .watertight import grid_cell_size, make_watertight


def process_mesh(mesh, config=None, stages=None):
    """Run remesh -> simplify -> smooth.

    When ``stages`` is a dict it receives the intermediate meshes under the
    keys ``watertight``, ``simplified`` and ``smoothed``.
    """
    config = config or ProcessConfig()
    closed = make_watertight(mesh, config.manifold_leaves, seed=config.seed)
    simple = simplify_qem(closed, config.ratio)
    smooth = smooth_manifold(simple, config.smooth_iterations, config.hc_alpha, config.hc_beta)
    if stages is not None:
        stages.update(watertight=closed, simplified=simple, smoothed=smooth)
    return smooth


__all__ = [
    "ProcessConfig",
    "grid_cell_size",
    "make_watertight",
    "process_mesh",
    "simplify_qem",
    "smooth_manifold",
]
