#!/usr/bin/env python3
"""Benchmark the compiled kernels against the NumPy fallback.

Run after `pip install -e .`:

    python benchmarks/bench_kernels.py [--repeats N]

Times both backend implementations of each hot kernel on
deployment-scale inputs and prints a side-by-side table.  The NumPy
fallback delegates dense products to BLAS/LAPACK, so it is expected to win
on the large matrix products; the compiled kernels win on the scalar-heavy
loops (Poisson inversion, small solves) and keep the package fully
functional when BLAS threading or the extension toolchain is unavailable.
"""

import argparse
import time

import numpy as np

from jacobiprior import backend


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def build_cases(rng):
    X = rng.standard_normal((2000, 576))
    T = rng.standard_normal((2000, 3))
    M = rng.standard_normal((800, 576))
    A576 = M.T @ M / 800 + np.eye(576)
    B576 = rng.standard_normal((576, 3))
    G = rng.standard_normal((600, 32))
    lam = rng.uniform(0.2, 25.0, 500_000)
    u = rng.random(500_000)
    coef = rng.standard_normal((576, 3))

    def cases(mod):
        L = mod.cholesky(A576)
        return [
            ("gram 2000x576", lambda: mod.gram(X)),
            ("crossprod 2000x576 . 2000x3", lambda: mod.crossprod(X, T)),
            ("matmul 2000x576 @ 576x3", lambda: mod.matmul(X, coef)),
            ("cholesky 576", lambda: mod.cholesky(A576)),
            ("cholesky solve 576, 3 rhs", lambda: mod.solve_cholesky(L, B576)),
            ("rbf kernel matrix 600x600x32", lambda: mod.rbf_matrix_sym(G, 2.0, 1.0)),
            ("poisson inversion 500k draws", lambda: mod.poisson_inversion(lam, u)),
        ]

    return cases


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    names = backend.available_backends()
    if len(names) < 2:
        print(f"only the {names[0]} backend is importable; build the extension "
              "with 'pip install -e .' to compare")
    rng = np.random.default_rng(0)
    cases = build_cases(rng)

    results = {}
    for name in names:
        mod = backend.backend_module(name)
        for label, fn in cases(mod):
            results.setdefault(label, {})[name] = best_of(fn, args.repeats)

    width = max(len(label) for label in results) + 2
    header = f"{'kernel':<{width}}" + "".join(f"{name:>12}" for name in names)
    if len(names) == 2:
        header += f"{'ratio':>10}"
    print(header)
    print("-" * len(header))
    for label, timings in results.items():
        row = f"{label:<{width}}"
        for name in names:
            row += f"{timings[name] * 1e3:>10.2f}ms"
        if len(names) == 2:
            a, b = (timings[name] for name in names)
            row += f"{b / a:>10.2f}"
        print(row)
    if len(names) == 2:
        print(f"\nratio = {names[1]} time / {names[0]} time (> 1 means {names[0]} is faster)")


if __name__ == "__main__":
    main()
