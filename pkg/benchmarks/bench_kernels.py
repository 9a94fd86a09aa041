"""Compiled versus numpy kernels for the closed-form scalar curvatures.

Usage: ``python benchmarks/bench_kernels.py [--sizes 1000 100000 1000000] [--repeat 5]``
"""

import argparse
import timeit

import numpy as np

from glsurgery import kernels


def _inputs(rng, size):
    pos = lambda: rng.uniform(0.1, 2.0, size)
    any_ = lambda: rng.uniform(-1.0, 1.0, size)
    return {
        "single_warped": (pos(), any_(), any_(), 4),
        "doubly_warped": (pos(), any_(), any_(), pos(), any_(), any_(), 1, 3),
        "eq21": (pos(), any_(), any_(), any_(), pos(), any_(), any_(), any_(), any_(), 3),
        "eq22": (pos(), any_(), any_(), pos(), any_(), any_(), 3),
    }


def bench(sizes, repeat):
    rng = np.random.default_rng(0)
    backends = kernels.available_backends()
    rows = []
    for size in sizes:
        for name, args in _inputs(rng, size).items():
            times = {}
            outs = {}
            for b in backends:
                prev = kernels.use_backend(b)
                fn = getattr(kernels, name)
                try:
                    outs[b] = fn(*args)
                    times[b] = min(timeit.repeat(lambda: fn(*args), number=3, repeat=repeat)) / 3
                finally:
                    kernels.use_backend(prev)
            diff = (float(np.abs(outs["compiled"] - outs["python"]).max())
                    if "compiled" in outs else float("nan"))
            rows.append((name, size, times, diff))
    return backends, rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="+", default=[1_000, 100_000, 1_000_000])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends, rows = bench(args.sizes, args.repeat)
    print(f"{'kernel':<14}{'size':>10}" + "".join(f"{b + ' ms':>14}" for b in backends)
          + f"{'speedup':>10}{'max |diff|':>12}")
    for name, size, times, diff in rows:
        line = f"{name:<14}{size:>10}" + "".join(f"{1e3 * times[b]:>14.3f}" for b in backends)
        speed = times["python"] / times["compiled"] if "compiled" in times else float("nan")
        print(line + f"{speed:>10.2f}{diff:>12.1e}")


if __name__ == "__main__":
    main()
