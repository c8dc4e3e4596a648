"""Compare the compiled and the numpy simplex on Minkowski-functional LPs.

    python3 benchmarks/bench_simplex.py [--repeat N]

Each case draws a random vertex set and query points, then times both
backends on the symmetric and the positive LP shapes and checks that they
return the same objective.
"""

import argparse
import time

import numpy as np

from dwellcert import _simplex_py

try:
    from dwellcert import _simplex_ext
except ImportError:
    _simplex_ext = None

CASES = [(2, 200), (4, 300), (4, 1500), (13, 400), (13, 2000)]


def lp_data(d, k, positive, rng):
    V = rng.standard_normal((d, k))
    if positive:
        V = np.abs(V)
        A = np.hstack([V, -np.eye(d)])
        c = np.concatenate([np.ones(k), np.zeros(d)])
        xs = np.abs(rng.standard_normal((8, d)))
    else:
        A = np.hstack([V, -V])
        c = np.ones(2 * k)
        xs = rng.standard_normal((8, d))
    return A, c, xs


def per_solve(solve, A, c, xs, repeat):
    t0 = time.perf_counter()
    for _ in range(repeat):
        for x in xs:
            solve(A, x, c)
    return (time.perf_counter() - t0) / (repeat * len(xs))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _simplex_ext is None:
        print("compiled extension not built; only the numpy backend is available")
    rng = np.random.default_rng(args.seed)
    print(f"{'variant':<10}{'d':>4}{'k':>6}{'numpy [us]':>13}{'compiled [us]':>15}{'speedup':>9}  agree")
    for positive in (False, True):
        for d, k in CASES:
            A, c, xs = lp_data(d, k, positive, rng)
            t_py = per_solve(_simplex_py.solve, A, c, xs, args.repeat)
            name = "positive" if positive else "symmetric"
            if _simplex_ext is None:
                print(f"{name:<10}{d:>4}{k:>6}{t_py * 1e6:>13.0f}{'-':>15}{'-':>9}")
                continue
            t_cy = per_solve(_simplex_ext.solve, A, c, xs, args.repeat)
            agree = all(
                np.isclose(_simplex_py.solve(A, x, c)[1], _simplex_ext.solve(A, x, c)[1], rtol=1e-9, atol=1e-12)
                for x in xs
            )
            print(f"{name:<10}{d:>4}{k:>6}{t_py * 1e6:>13.0f}{t_cy * 1e6:>15.0f}{t_py / t_cy:>8.1f}x  {agree}")


if __name__ == "__main__":
    main()
