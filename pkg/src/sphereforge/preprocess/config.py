"""Preprocessing parameters."""

from dataclasses import dataclass


@dataclass(frozen=True)
class ProcessConfig:
    """Knobs of the watertight -> simplify -> smooth pipeline.

    ``manifold_leaves`` sets the remeshing grid: the mesh's bounding box is
    cut into roughly ``8 * manifold_leaves`` cubic cells. ``seed`` drives the
    ray directions of the inside/outside vote.
    """

    manifold_leaves: int = 1000
    ratio: float = 0.2
    smooth_iterations: int = 10
    hc_alpha: float = 0.1
    hc_beta: float = 0.6
    seed: int = 0

    def __post_init__(self):
        if int(self.manifold_leaves) != self.manifold_leaves or self.manifold_leaves < 8:
            raise ValueError("manifold_leaves must be an integer >= 8")
        if not 0 < self.ratio <= 1:
            raise ValueError("ratio must be in (0, 1]")
        if int(self.smooth_iterations) != self.smooth_iterations or self.smooth_iterations < 0:
            raise ValueError("smooth_iterations must be a non-negative integer")
        if not 0 <= self.hc_alpha <= 1 or not 0 <= self.hc_beta <= 1:
            raise ValueError("hc_alpha and hc_beta must lie in [0, 1]")
