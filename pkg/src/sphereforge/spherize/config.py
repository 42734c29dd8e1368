"""Spherization parameters."""

from dataclasses import asdict, dataclass, fields

METHODS = ("medial", "grid")


@dataclass(frozen=True)
class SpherizationConfig:
    """Parameters of the sphere fitter. Field names follow the keyword
    arguments users already know from sphere-tree toolkits.

    ``branch`` is the sphere budget per tree level (per link for robots),
    ``numCover`` the number of surface points the spheres must contain,
    ``initSpheres``/``minSpheres`` the medial-ball budget and floor,
    ``testerLevels`` sets ``10**testerLevels`` tester points per sphere,
    ``erFact`` the split trigger relative to the median sphere error and
    ``balExcess`` the merge tolerance as a fraction of the mean radius.
    """

    depth: int = 1
    branch: int = 8
    method: str = "medial"
    testerLevels: int = 2
    numCover: int = 500
    minCover: int = 5
    initSpheres: int = 1000
    minSpheres: int = 200
    erFact: float = 2.0
    expand: bool = True
    merge: bool = True
    burst: bool = False
    optimise: bool = True
    maxOptLevel: int = 1
    balExcess: float = 0.05
    verify: bool = True
    num_samples: int = 500
    min_samples: int = 1
    grid_resolution: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        for name in ("depth", "branch", "numCover", "minCover", "initSpheres", "minSpheres", "num_samples"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.numCover < self.minCover:
            raise ValueError("numCover must be >= minCover")
        if self.initSpheres < self.minSpheres:
            raise ValueError("initSpheres must be >= minSpheres")
        if self.balExcess < 0:
            raise ValueError("balExcess must be >= 0")
        if not 0 <= self.min_samples <= self.num_samples:
            raise ValueError("min_samples must lie in [0, num_samples]")
        if self.testerLevels < 0 or self.testerLevels > 5:
            raise ValueError("testerLevels must lie in [0, 5]")
        if self.maxOptLevel < 0:
            raise ValueError("maxOptLevel must be >= 0")
        if not self.erFact > 0:
            raise ValueError("erFact must be positive")
        if not self.grid_resolution > 0:
            raise ValueError("grid_resolution must be positive")

    def replace(self, **changes):
        data = asdict(self)
        data.update(changes)
        return SpherizationConfig(**data)

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]
