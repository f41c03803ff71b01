"""Time the compiled radial integrator against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from staticmd import PhysicalConstants, solve_spherical
from staticmd.kernels import compiled_kernel, integrate_radial_py
from staticmd.spherical import ShootingConfig, tail_state


def _inputs(n_nodes):
    r = np.geomspace(200.0, 0.05, n_nodes)
    y0 = np.array(tail_state(PhysicalConstants(1.0, 1.0), r[0]))
    return r, y0


def bench(repeat=5):
    compiled = compiled_kernel()
    rows = []
    for n_nodes in (201, 2001, 20001):
        r, y0 = _inputs(n_nodes)
        kernels = [("python", integrate_radial_py)]
        if compiled is not None:
            kernels.append(("cython", compiled))
        times = {}
        for name, fn in kernels:
            t = timeit.repeat(lambda: fn(r, y0, 1.0, 1.0, 1, -1.0), number=1, repeat=repeat)
            times[name] = min(t)
        rows.append((f"integrate n_nodes={n_nodes}", times))

    cfg = ShootingConfig(tail_terms=1)
    c = PhysicalConstants(1.0, 1.0)
    times = {}
    for name, fn in [("python", integrate_radial_py), ("cython", compiled)]:
        if fn is None:
            continue
        t = timeit.repeat(lambda: solve_spherical(c, cfg, integrator=fn), number=1, repeat=repeat)
        times[name] = min(t)
    rows.append(("shooting solve (tail_terms=1)", times))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'case':36s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, t in bench(args.repeat):
        py = t["python"] * 1e3
        cy = t.get("cython")
        if cy is None:
            print(f"{label:36s} {py:12.2f} {'n/a':>12s} {'n/a':>8s}")
        else:
            print(f"{label:36s} {py:12.2f} {cy * 1e3:12.3f} {py / (cy * 1e3):7.1f}x")


if __name__ == "__main__":
    main()
