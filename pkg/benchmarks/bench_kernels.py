"""Benchmark the compiled raster kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--size 1024] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from chartextract.raster import kernels


def _time(fn, *args, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=1024)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    img = (rng.random((args.size, args.size)) < 0.4).astype(np.uint8) * 255

    print(f"active backend: {kernels.BACKEND}")
    print(f"image: {args.size}x{args.size}, repeat: {args.repeat} (best time shown)")
    rows = [
        ("label (8-conn)", kernels.label, kernels.label_pure, (img, 8)),
        ("erode r=2", kernels.erode, kernels.erode_pure, (img, 2)),
        ("dilate r=2", kernels.dilate, kernels.dilate_pure, (img, 2)),
    ]
    header = f"{'kernel':<16} {'compiled (s)':>13} {'pure (s)':>13} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, fast, pure, call_args in rows:
        t_pure = _time(pure, *call_args, repeat=args.repeat)
        if kernels.BACKEND == "compiled":
            t_fast = _time(fast, *call_args, repeat=args.repeat)
            print(f"{name:<16} {t_fast:>13.5f} {t_pure:>13.5f} {t_pure / t_fast:>7.1f}x")
        else:
            print(f"{name:<16} {'n/a':>13} {t_pure:>13.5f} {'n/a':>8}")


if __name__ == "__main__":
    main()
