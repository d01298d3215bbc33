"""Time the numba and numpy kernels on the same inputs.

    python benchmarks/bench_kernels.py [--points 200000] [--relays 64] [--repeat 5]

The first numba call (compilation) is excluded; each figure is the best of
``--repeat`` runs.
"""

import argparse
import time

import numpy as np

from uavrelay.kernels import numba_impl, numpy_impl


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000)
    ap.add_argument("--relays", type=int, default=64)
    ap.add_argument("--dim", type=int, default=1, choices=(1, 2))
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if numba_impl is None:
        raise SystemExit("numba is not importable; nothing to compare")

    rng = np.random.default_rng(0)
    x = rng.uniform(0, 1, (args.points, args.dim))
    y = rng.uniform(2, 3, (args.points, args.dim))
    U = rng.uniform(0, 3, (args.relays, args.dim))
    g = rng.uniform(1, 2, args.relays)
    w = rng.uniform(0.1, 1, args.points)
    u = np.full(args.dim, 1.5)

    cases = {
        "assign_centralized": lambda m: m.assign_centralized(x, y, U, 1.0, 0.0, 2.0),
        "assign_distributed": lambda m: m.assign_distributed(x, U, g, 1.0, 0.0, 2.0),
        "assign_centralized r=3": lambda m: m.assign_centralized(x, y, U, 1.0, 0.25, 3.0),
        "weber_derivs r=3": lambda m: m.weber_derivs(x, w, u, 0.25, 3.0),
    }
    print(f"points={args.points} relays={args.relays} dim={args.dim} repeat={args.repeat}")
    print(f"{'kernel':<24}{'numpy ms':>10}{'numba ms':>10}{'speedup':>9}")
    for name, call in cases.items():
        call(numba_impl)
        t_np = best_of(lambda: call(numpy_impl), args.repeat)
        t_nb = best_of(lambda: call(numba_impl), args.repeat)
        print(f"{name:<24}{1e3 * t_np:>10.2f}{1e3 * t_nb:>10.2f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
