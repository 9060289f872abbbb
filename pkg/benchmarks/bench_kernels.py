"""Compare the numba and numpy backends of the hot kernels.

    python3 benchmarks/bench_kernels.py [--p 5] [--level 2] [--repeat 3]

Each kernel is timed in-process with both backends (the env flag is read on
every call); the first numba call is a warm-up so compilation is excluded.
"""

import argparse
import os
import timeit

import numpy as np

from engel import _kernels
from engel.dual import enumerate_dual, monomial_row
from engel.group import quotient
from engel.operators import sub_laplacian_matrix


def cases(p, n):
    T = sub_laplacian_matrix(1.0, n, p)
    Q = quotient(p, n)
    rng = np.random.default_rng(0)
    f = rng.standard_normal(T.size) + 1j * rng.standard_normal(T.size)
    xi = max(enumerate_dual(p, n), key=lambda x: x.dim)
    col, val = monomial_row(xi, 0, Q)
    S = np.zeros((xi.dim, xi.dim), dtype=complex)
    return {
        "shift_apply": lambda: _kernels.shift_apply(f, T.tgt, T.w),
        "restrict": lambda: _kernels.restrict(col, val, T.tgt, T.w, xi.dim),
        "residual": lambda: _kernels.residual(col, val, T.tgt, T.w, xi.dim, S),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=int, default=5)
    ap.add_argument("--level", type=int, default=2)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels.njit is None:
        raise SystemExit("numba is not installed; nothing to compare")
    fns = cases(args.p, args.level)
    print(f"p={args.p} level={args.level} size={args.p ** (4 * args.level)}")
    print(f"{'kernel':<12} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8}")
    for name, fn in fns.items():
        times = {}
        for backend in ("numba", "numpy"):
            if backend == "numpy":
                os.environ["ENGEL_DISABLE_NUMBA"] = "1"
            else:
                os.environ.pop("ENGEL_DISABLE_NUMBA", None)
                fn()
            times[backend] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        os.environ.pop("ENGEL_DISABLE_NUMBA", None)
        print(f"{name:<12} {times['numba']:>10.4f} {times['numpy']:>10.4f} {times['numpy'] / times['numba']:>7.1f}x")


if __name__ == "__main__":
    main()
