#!/usr/bin/env python3
"""Benchmark the numba hot kernels against the pure-numpy reference.

Usage: python3 benchmarks/bench_kernels.py [--size 128] [--reps 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from mvgeo.kernels import get_backend


def time_call(fn, reps):
    best = np.inf
    for _ in range(reps):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=128,
                        help="image side length")
    parser.add_argument("--channels", type=int, default=3)
    parser.add_argument("--samples", type=int, default=200_000,
                        help="bilinear sample count")
    parser.add_argument("--patch-radius", type=int, default=2)
    parser.add_argument("--search-radius", type=int, default=4)
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    h = w = args.size
    data = rng.normal(size=(h, w, args.channels))
    us = rng.uniform(-1, w, args.samples)
    vs = rng.uniform(-1, h, args.samples)
    ref = rng.normal(size=(h, w, args.channels))
    tgt = rng.normal(size=(h, w, args.channels))

    backends = {"numpy": get_backend("numpy")}
    try:
        backends["numba"] = get_backend("numba")
    except ImportError:
        print("numba unavailable; benchmarking numpy only")

    cases = {
        "bilinear_many": lambda b: b.bilinear_many(data, us, vs),
        "zncc_scores": lambda b: b.zncc_scores(ref, tgt, args.patch_radius,
                                               args.search_radius),
    }

    # warm up so JIT compilation is not timed
    for backend in backends.values():
        for case in cases.values():
            case(backend)

    print(f"image {h}x{w}x{args.channels}, {args.samples} samples, "
          f"best of {args.reps}")
    print("kernel\tnumpy_s\tnumba_s\tspeedup")
    for name, case in cases.items():
        times = {bname: time_call(lambda b=backend: case(b), args.reps)
                 for bname, backend in backends.items()}
        t_np = times["numpy"]
        t_nb = times.get("numba")
        if t_nb is None:
            print(f"{name}\t{t_np:.4f}\t-\t-")
        else:
            print(f"{name}\t{t_np:.4f}\t{t_nb:.4f}\t{t_np / t_nb:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
