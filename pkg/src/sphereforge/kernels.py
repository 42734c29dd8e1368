"""Backend selection for the hot query kernels.

The compiled extension is used when it imports; otherwise the numpy twin
takes over. Set ``SPHEREFORGE_KERNELS=python`` to force the fallback.
"""

import logging
import os

from . import _pykernels

log = logging.getLogger(__name__)

_FUNCS = (
    "closest_points",
    "ray_parity",
    "winding_numbers",
    "mesh_env_collide",
    "mesh_env_distance",
    "spheres_env_collide",
    "spheres_env_distance",
)


def _load(name):
    if name == "python":
        return _pykernels
    from . import _ckernels

    return _ckernels


def available_backends():
    """Names of the backends that can be loaded in this environment."""
    names = ["python"]
    try:
        _load("compiled")
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def get_backend(name):
    """Kernel module for ``name`` (``"compiled"`` or ``"python"``)."""
    if name not in ("compiled", "python"):
        raise ValueError(f"unknown kernel backend {name!r}")
    return _load(name)


_requested = os.environ.get("SPHEREFORGE_KERNELS", "").strip().lower()
if _requested == "python":
    BACKEND = "python"
    _impl = _pykernels
else:
    try:
        _impl = _load("compiled")
        BACKEND = "compiled"
    except ImportError:
        log.debug("compiled kernels unavailable, using numpy fallback")
        _impl = _pykernels
        BACKEND = "python"

closest_points = _impl.closest_points
ray_parity = _impl.ray_parity
winding_numbers = _impl.winding_numbers
mesh_env_collide = _impl.mesh_env_collide
mesh_env_distance = _impl.mesh_env_distance
spheres_env_collide = _impl.spheres_env_collide
spheres_env_distance = _impl.spheres_env_distance

__all__ = ["BACKEND", "available_backends", "get_backend", *_FUNCS]
