#!/usr/bin/env python3
"""Benchmark the nearest-seed scan: compiled kernel vs NumPy fallback.

Sizes default to a realistic post-embedding workload (thousands of
segments, a few hundred seeds, transformer-width vectors). Both lanes
are verified to agree before timing.

    python3 benchmarks/bench_nearest.py --segments 8192 --seeds 600 --dim 768
"""

from __future__ import annotations

import argparse
import time

import numpy as np

import lexmap.kernels as kernels
from lexmap import _nearest_py

try:
    from lexmap import _nearest_c
except ImportError:
    _nearest_c = None


def run_lane(impl, x, s, f, repeats):
    saved = kernels._impl
    kernels._impl = impl
    try:
        kernels.nearest_seeds(x[:64], s, f)  # warm-up
        best = float("inf")
        for _ in range(repeats):
            start = time.perf_counter()
            out = kernels.nearest_seeds(x, s, f)
            best = min(best, time.perf_counter() - start)
        return out, best
    finally:
        kernels._impl = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--segments", type=int, default=8192)
    parser.add_argument("--seeds", type=int, default=600)
    parser.add_argument("--dim", type=int, default=768)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(1)
    x = rng.normal(size=(args.segments, args.dim))
    s = rng.normal(size=(args.seeds, args.dim))
    f = rng.integers(0, 6, size=args.seeds)

    print(f"workload: {args.segments} segments x {args.seeds} seeds x dim {args.dim}")
    print(f"active backend at import: {kernels.ACTIVE_BACKEND}")

    (py_f, py_d, _), py_t = run_lane(_nearest_py.nearest_scan, x, s, f, args.repeats)
    rate = args.segments / py_t
    print(f"numpy fallback : {py_t * 1000:8.1f} ms   {rate:12.0f} segments/s")

    if _nearest_c is None:
        print("compiled kernel: not built (pip install -e . with a C compiler)")
        return

    (c_f, c_d, _), c_t = run_lane(_nearest_c.nearest_scan, x, s, f, args.repeats)
    rate = args.segments / c_t
    print(f"compiled kernel: {c_t * 1000:8.1f} ms   {rate:12.0f} segments/s")
    print(f"speedup (compiled over fallback): {py_t / c_t:.2f}x")

    assert np.array_equal(py_f, c_f), "lanes disagree on factors"
    assert np.allclose(py_d, c_d, atol=1e-12), "lanes disagree on distances"
    print("lanes agree: factors identical, distances within 1e-12")


if __name__ == "__main__":
    main()
