"""Random obstacle environments made of boxes and spheres."""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

SIZE_RANGE = (0.05, 0.4)
DEFAULT_BOUNDS = ((-1.0, -1.0, -1.0), (1.0, 1.0, 1.0))


@dataclass(frozen=True)
class Environment:
    """Obstacles stored as flat arrays, ready for the query kernels.

    Boxes: ``box_centers`` (B, 3), ``box_rotations`` (3B, 3) with the
    box-to-world rotations stacked row-wise, ``box_half`` (B, 3) half
    extents. Spheres: ``sphere_centers`` (S, 3) and ``sphere_radii`` (S,).
    """

    bounds: tuple
    box_centers: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    box_rotations: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    box_half: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    sphere_centers: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    sphere_radii: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        for name in ("box_centers", "box_rotations", "box_half", "sphere_centers"):
            object.__setattr__(self, name, np.ascontiguousarray(getattr(self, name), dtype=np.float64).reshape(-1, 3))
        object.__setattr__(self, "sphere_radii", np.ascontiguousarray(self.sphere_radii, dtype=np.float64).reshape(-1))
        if len(self.box_rotations) != 3 * len(self.box_centers) or len(self.box_half) != len(self.box_centers):
            raise ValueError("box arrays disagree in length")
        if len(self.sphere_radii) != len(self.sphere_centers):
            raise ValueError("sphere arrays disagree in length")
        if np.any(self.box_half <= 0) or np.any(self.sphere_radii <= 0):
            raise ValueError("obstacle dimensions must be positive")

    def __len__(self):
        return len(self.box_centers) + len(self.sphere_centers)

    @property
    def kernel_args(self):
        return (self.box_centers, self.box_rotations, self.box_half, self.sphere_centers, self.sphere_radii)

    def box_rotation(self, i):
        return self.box_rotations[3 * i:3 * i + 3]

    def centers(self):
        return np.concatenate([self.box_centers, self.sphere_centers])


def generate_environment(seed, n_obstacles, bounds=DEFAULT_BOUNDS):
    """``n_obstacles`` primitives with centres uniform in ``bounds``.

    Each obstacle is a box or a sphere with equal odds. Box edge lengths
    and sphere radii are uniform in [0.05, 0.4] m; boxes get a uniformly
    random orientation.
    """
    if n_obstacles < 0:
        raise ValueError("n_obstacles must be >= 0")
    lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    if lo.shape != (3,) or hi.shape != (3,) or np.any(hi < lo):
        raise ValueError("bounds must be two 3-vectors with lo <= hi")
    rng = np.random.default_rng(seed)
    is_box = rng.random(n_obstacles) < 0.5
    centers = rng.uniform(lo, hi, size=(n_obstacles, 3))
    sizes = rng.uniform(*SIZE_RANGE, size=(n_obstacles, 3))
    nb = int(is_box.sum())
    rots = Rotation.random(nb, random_state=rng).as_matrix().reshape(-1, 3) if nb else np.zeros((0, 3))
    return Environment(
        bounds=(tuple(lo), tuple(hi)),
        box_centers=centers[is_box],
        box_rotations=rots,
        box_half=0.5 * sizes[is_box],
        sphere_centers=centers[~is_box],
        sphere_radii=sizes[~is_box, 0],
    )
