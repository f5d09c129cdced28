#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Runs the two hot bit-matching kernels on detector-censoring and
network-match-matrix shaped workloads, checks both backends agree
bit-for-bit, and prints per-call timings with the speedup.

    python3 benchmarks/bench_kernels.py [--repeats 7]
"""

import argparse
import time

import numpy as np

from ais_kit.kernels import numba_backend, numpy_backend


def best_of(fn, repeats):
    timings = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - start)
    return min(timings)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    workloads = [
        (
            "censoring: longest run, 2000 candidates x 200 self, l=32",
            "longest_run_matrix",
            (
                rng.integers(0, 2, size=(2000, 32), dtype=np.uint8),
                rng.integers(0, 2, size=(200, 32), dtype=np.uint8),
            ),
        ),
        (
            "match matrix: shifted reactions, 300 x 300 antibodies, l=16, s=4",
            "reaction_matrix",
            (
                rng.integers(0, 2, size=(300, 16), dtype=np.uint8),
                rng.integers(0, 2, size=(300, 16), dtype=np.uint8),
                4,
                4,
                True,
            ),
        ),
    ]

    if numba_backend is None:
        print("numba backend unavailable; timing the numpy fallback only")

    for label, name, arguments in workloads:
        slow_fn = getattr(numpy_backend, name)
        slow = best_of(lambda: slow_fn(*arguments), args.repeats)
        line = f"{label}\n  numpy  {slow * 1000:8.2f} ms"
        if numba_backend is not None:
            fast_fn = getattr(numba_backend, name)
            fast_fn(*arguments)  # compile outside the timed region
            if not np.array_equal(fast_fn(*arguments), slow_fn(*arguments)):
                raise SystemExit(f"backend mismatch on {name}")
            fast = best_of(lambda: fast_fn(*arguments), args.repeats)
            line += f"\n  numba  {fast * 1000:8.2f} ms   ({slow / fast:5.1f}x)"
        print(line)


if __name__ == "__main__":
    main()
