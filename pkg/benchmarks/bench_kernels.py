"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each row times one kernel on the same inputs under both backends and
checks that the results agree.
"""

import argparse
import time

import numpy as np

from sphereforge import kernels
from sphereforge.bench import generate_environment
from sphereforge.geometry.shapes import capsule, icosphere
from sphereforge.geometry.spheres import SphereSet


def _time(fn, repeat):
    best = np.inf
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases():
    mesh = capsule(0.1, 0.4, 100, 25)
    bvh = mesh.bvh
    rng = np.random.default_rng(0)
    pts = rng.uniform(-0.3, 0.3, size=(2000, 3)) + [0, 0, 0]
    dirs = rng.normal(size=(2000, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    small = icosphere(2)
    wpts = rng.uniform(-1.5, 1.5, size=(500, 3))
    env = generate_environment(1, 20, ((-0.5, -0.5, -0.5), (0.5, 0.5, 0.5)))
    rot, trans = np.eye(3), np.zeros(3)
    spheres = SphereSet(rng.uniform(-0.2, 0.2, size=(16, 3)), np.full(16, 0.05))
    yield "closest_points (10k tris, 2000 pts)", lambda k: k.closest_points(*bvh.arrays, pts)[0]
    yield "ray_parity (10k tris, 2000 rays)", lambda k: k.ray_parity(*bvh.arrays, pts, dirs)[0]
    yield "winding_numbers (320 tris, 500 pts)", lambda k: k.winding_numbers(small.triangles, wpts)
    yield "mesh_env_collide (10k tris, 20 obstacles)", \
        lambda k: k.mesh_env_collide(*bvh.arrays, False, rot, trans, *env.kernel_args)
    yield "mesh_env_distance (10k tris, 20 obstacles)", \
        lambda k: k.mesh_env_distance(*bvh.arrays, False, rot, trans, *env.kernel_args)
    yield "spheres_env_distance (16 spheres, 20 obstacles)", \
        lambda k: k.spheres_env_distance(spheres.centers, spheres.radii, rot, trans, *env.kernel_args)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = kernels.available_backends()
    if "compiled" not in backends:
        print("compiled kernels are not built; only the numpy fallback is available")
    print(f"{'kernel':<50}{'compiled (ms)':>15}{'python (ms)':>15}{'speedup':>10}  agree")
    for name, fn in cases():
        times, outs = {}, {}
        for b in backends:
            times[b], outs[b] = _time(lambda: fn(kernels.get_backend(b)), args.repeat)
        if len(backends) == 2:
            agree = np.allclose(np.asarray(outs["compiled"], dtype=float), np.asarray(outs["python"], dtype=float),
                                rtol=1e-9, atol=1e-12)
            print(f"{name:<50}{times['compiled'] * 1e3:>15.3f}{times['python'] * 1e3:>15.3f}"
                  f"{times['python'] / times['compiled']:>10.1f}  {agree}")
        else:
            print(f"{name:<50}{'-':>15}{times['python'] * 1e3:>15.3f}{'-':>10}  -")


if __name__ == "__main__":
    main()
