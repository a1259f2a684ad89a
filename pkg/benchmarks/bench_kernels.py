"""Compiled double-sum loops against the numpy fallback.

Run ``python3 benchmarks/bench_kernels.py``.  Each case times the row sums
that dominate linking, writhe and helicity, checks that both backends agree,
and prints the best of ``--repeat`` wall times.
"""
import argparse
import time

import numpy as np

from curvedlink import _backend as B
from curvedlink.curves import canonical_curve, clifford_torus_knot
from curvedlink.fields import eval_field, left_invariant
from curvedlink.quadrature import S3Grid


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(n, grid):
    a, b = canonical_curve("hopf_a", n=n), canonical_curve("hopf_b", n=n)
    k = clifford_torus_knot(2, 3, n)
    G = S3Grid.build(*grid)
    V = eval_field(left_invariant(1.0, 0.5, 0.0), G.nodes)
    yield (f"link s3 parallel n={n}",
           lambda pure: B.link_rows(B.MODE_S3_PARALLEL, a.points, a.velocity, b.points, b.velocity, pure=pure))
    yield (f"link s3 left n={n}",
           lambda pure: B.link_rows(B.MODE_S3_LEFT, a.points, a.velocity, b.points, b.velocity, pure=pure))
    yield (f"writhe s3 parallel n={n}",
           lambda pure: B.link_rows(B.MODE_S3_PARALLEL, k.points, k.velocity, k.points, k.velocity, diag=True,
                                    pure=pure))
    yield (f"helicity s3 grid={'x'.join(map(str, grid))}",
           lambda pure: B.helicity_rows(B.MODE_S3_PARALLEL, G.nodes, V, G.weights, 0.05, pure=pure))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--samples", type=int, default=512)
    p.add_argument("--grid", default="8,16,16")
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    grid = tuple(int(v) for v in args.grid.split(","))
    compiled = B.backend_name() == "compiled"
    print(f"backend: {B.backend_name()}, workers: {B.default_workers()}")
    print(f"{'case':32s} {'numpy [s]':>10s} {'compiled [s]':>13s} {'speedup':>8s} {'max diff':>9s}")
    for name, fn in cases(args.samples, grid):
        t_pure, out_pure = best_time(lambda: fn(True), args.repeat)
        if not compiled:
            print(f"{name:32s} {t_pure:10.4f} {'-':>13s} {'-':>8s} {'-':>9s}")
            continue
        t_fast, out_fast = best_time(lambda: fn(False), args.repeat)
        diff = max(float(np.abs(np.asarray(f) - np.asarray(s)).max())
                   for f, s in zip(np.atleast_2d(out_fast), np.atleast_2d(out_pure)))
        print(f"{name:32s} {t_pure:10.4f} {t_fast:13.4f} {t_pure / t_fast:8.1f} {diff:9.1e}")


if __name__ == "__main__":
    main()
