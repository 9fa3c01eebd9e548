"""Time the numba kernels against the pure-numpy fallback.

Each case builds a V_1 + V_3 operator, solves it through both backends,
checks that the spectra agree, and prints the median wall time per solve.

    python3 benchmarks/bench_backends.py --M 20 60 100 --repeat 5
"""
import argparse
import statistics
import time

import numpy as np

from ptannulus import PotentialSpec, build
from ptannulus.eigen import eigpairs, eigvals


def timed(fn, repeat):
    fn()  # warm-up (numba compiles or loads its cache here)
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, nargs="+", default=[20, 60, 100])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--vectors", action="store_true", help="benchmark eigpairs instead of eigvals")
    args = ap.parse_args()

    solve = eigpairs if args.vectors else eigvals
    spec = PotentialSpec.single(1, 0.6).with_strengths({"v:3": 1.2})
    print(f"{'M':>5} {'dim':>5} {'numba [s]':>12} {'numpy [s]':>12} {'speedup':>8} {'max |diff|':>11}")
    for M in args.M:
        op = build(spec, M)
        a = solve(op, backend="numba").eigenvalues
        b = solve(op, backend="numpy").eigenvalues
        diff = float(np.max(np.abs(a - b)))
        t_nb = timed(lambda: solve(op, backend="numba"), args.repeat)
        t_np = timed(lambda: solve(op, backend="numpy"), args.repeat)
        print(f"{M:5d} {op.dimension:5d} {t_nb:12.5f} {t_np:12.5f} {t_np / t_nb:8.1f} {diff:11.2e}")


if __name__ == "__main__":
    main()
