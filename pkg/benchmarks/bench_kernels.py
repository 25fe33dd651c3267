#!/usr/bin/env python3
"""Benchmark the compiled CSR kernels against the NumPy fallback.

Times the three hot kernels (spmv, ILU(0) factorization, the L/U solve
pair) on a 2-D Poisson-like pattern, plus one end-to-end GMRES solve per
backend. Run from the repo root after `python setup.py build_ext --inplace`:

    python benchmarks/bench_kernels.py [--grid-n 64] [--repeat 50]
"""

import argparse
import time

import numpy as np

from inewton import bratu2d, gmres_solve, ilu0_factorize, norm2
from inewton.krylov import KrylovConfig
from inewton.linalg import _kernels_py

try:
    from inewton.linalg import _kernels as _kernels_c
except ImportError:
    _kernels_c = None


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(kernels, A, x, repeat):
    indptr, indices, values = A.row_offsets, A.col_indices, A.values
    diag = A.diagonal_positions()
    out = np.empty(A.n_rows)
    res = {}
    res["spmv"] = timeit(lambda: kernels.spmv(indptr, indices, values, x, out), repeat)

    def factor():
        data = values.copy()
        kernels.ilu0_factorize(indptr, indices, data, diag)
        return data

    res["ilu0_factorize"] = timeit(factor, max(3, repeat // 4))
    data = factor()
    y = np.empty(A.n_rows)
    z = np.empty(A.n_rows)

    def solve_pair():
        kernels.solve_lower_unit(indptr, indices, data, diag, x, y)
        kernels.solve_upper(indptr, indices, data, diag, y, z)

    res["ilu0_solve_pair"] = timeit(solve_pair, repeat)
    return res


def bench_gmres(A, b, use_compiled):
    import inewton.linalg.backend as backend
    import inewton.linalg.sparse as sparse

    saved = backend.kernels
    try:
        backend.kernels = _kernels_c if use_compiled else _kernels_py
        sparse._K = backend.kernels
        M = ilu0_factorize(A)
        t0 = time.perf_counter()
        result = gmres_solve(A, b, 1e-10, M, KrylovConfig())
        elapsed = time.perf_counter() - t0
        assert result.converged
        return elapsed, result.iterations
    finally:
        backend.kernels = saved
        sparse._K = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid-n", type=int, default=64)
    parser.add_argument("--repeat", type=int, default=50)
    args = parser.parse_args()

    problem = bratu2d(args.grid_n, 2.0)
    A = problem.jacobian(problem.initial_guess)
    rng = np.random.default_rng(0)
    x = rng.standard_normal(A.n_rows)
    b = A @ rng.standard_normal(A.n_rows)

    print(f"matrix: {A.n_rows} x {A.n_cols}, nnz = {A.nnz}")
    rows = {"python": bench_backend(_kernels_py, A, x, args.repeat)}
    if _kernels_c is not None:
        rows["compiled"] = bench_backend(_kernels_c, A, x, args.repeat)
    else:
        print("compiled kernels not available; showing fallback only")

    names = ["spmv", "ilu0_factorize", "ilu0_solve_pair"]
    header = f"{'kernel':18s}" + "".join(f"{k:>14s}" for k in rows)
    if len(rows) == 2:
        header += f"{'speedup':>10s}"
    print(header)
    for name in names:
        line = f"{name:18s}" + "".join(f"{rows[k][name] * 1e6:>12.1f}us" for k in rows)
        if len(rows) == 2:
            line += f"{rows['python'][name] / rows['compiled'][name]:>9.1f}x"
        print(line)

    tp, itp = bench_gmres(A, b, use_compiled=False)
    print(f"{'gmres(ilu0)':18s}{tp * 1e3:>12.2f}ms", end="")
    if _kernels_c is not None:
        tc, itc = bench_gmres(A, b, use_compiled=True)
        assert itc == itp
        print(f"{tc * 1e3:>12.2f}ms{tp / tc:>9.1f}x  ({itp} iterations)")
    else:
        print(f"  ({itp} iterations)")

    resid = norm2(b - A @ gmres_solve(A, b, 1e-10, ilu0_factorize(A),
                                      KrylovConfig()).solution) / norm2(b)
    print(f"check: final relative residual {resid:.2e}")


if __name__ == "__main__":
    main()
