#!/usr/bin/env python3
"""Benchmark the compiled depth-count kernel against the numpy fallback.

Both backends are required to produce bit-identical counts; this script
asserts that on every run before reporting timings, so a speed regression
can never hide a correctness one.

Usage: python3 benchmarks/bench_depth_kernel.py [--n 2000] [--tips 200] [--reps 5]
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from dqfkit._kernels import _fallback

try:
    from dqfkit._kernels import _core
except ImportError:
    _core = None


def _best_of(fn, reps: int) -> float:
    best = math.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description="depth-count kernel benchmark")
    parser.add_argument("--n", type=int, default=2000, help="observations per frame")
    parser.add_argument("--tips", type=int, default=200, help="cone tips per pair")
    parser.add_argument("--angles", type=int, default=3, help="opening angles")
    parser.add_argument("--reps", type=int, default=5, help="timed repetitions (best-of)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    t = rng.normal(size=args.n)
    perp2 = rng.uniform(0.0, 4.0, size=args.n)
    tips = np.sort(rng.normal(scale=2.0, size=args.tips))
    cos_alphas = np.cos(np.linspace(math.pi / 6, math.pi / 3, args.angles))

    ref_a, ref_b = _fallback.depth_counts(t, perp2, tips, cos_alphas)
    py_s = _best_of(lambda: _fallback.depth_counts(t, perp2, tips, cos_alphas), args.reps)
    print(f"python  backend: {py_s * 1e3:8.2f} ms   (n={args.n}, m={args.tips}, k={args.angles})")

    if _core is None:
        print("compiled backend: not built (pip install -e . rebuilds it)")
        return 0

    core_a, core_b = _core.depth_counts(t, perp2, tips, cos_alphas)
    assert np.array_equal(core_a, ref_a) and np.array_equal(core_b, ref_b), (
        "backends disagree — investigate before trusting any timing"
    )
    c_s = _best_of(lambda: _core.depth_counts(t, perp2, tips, cos_alphas), args.reps)
    print(f"compiled backend: {c_s * 1e3:8.2f} ms   (bit-identical counts)")
    print(f"speedup: {py_s / c_s:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
