"""Timing of the occupation-basis kernels: compiled extension vs pure Python.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from bosonclt import _kernels_py

try:
    from bosonclt import _kernels
except ImportError:  # extension not built
    _kernels = None

CASES = [(4, 12), (6, 8), (8, 6)]


def best_of(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench(mod, M, N, repeat):
    occ = np.ascontiguousarray(mod.enumerate_sector(M, N))
    return {
        "enumerate": best_of(lambda: mod.enumerate_sector(M, N), repeat),
        "rank": best_of(lambda: mod.rank_states(occ, N), repeat),
        "hop": best_of(lambda: mod.hop_structure(occ, N), repeat),
        "raise": best_of(lambda: mod.raise_structure(occ, N), repeat),
    }, occ.shape[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled backend not available; build with `pip install -e . --no-build-isolation`")
    print(f"{'M':>3} {'N':>3} {'dim':>7} {'kernel':>10} {'python [s]':>11} {'cython [s]':>11} {'speedup':>8}")
    for M, N in CASES:
        py, dim = bench(_kernels_py, M, N, args.repeat)
        cy = bench(_kernels, M, N, args.repeat)[0] if _kernels is not None else None
        for name in py:
            c = cy[name] if cy else float("nan")
            print(f"{M:>3} {N:>3} {dim:>7} {name:>10} {py[name]:>11.4f} {c:>11.5f} {py[name] / c:>8.1f}")


if __name__ == "__main__":
    main()
