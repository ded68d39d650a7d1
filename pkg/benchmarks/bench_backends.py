#!/usr/bin/env python3
"""Compare the compiled kernels against the NumPy fallback.

Runs the two hot kernels (per-pixel colour shift, particle stamping) and an
end-to-end pair synthesis at the default 1344x756 resolution with each
backend and prints a timing table.

    python benchmarks/bench_backends.py [--repeats N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from uwsynth._kernels import pyref

try:
    from uwsynth._kernels import _native
except ImportError:
    _native = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_color_shift(backend, repeats):
    rng = np.random.default_rng(0)
    h, w = 756, 1344
    phi = rng.random((h, w, 3))
    depth = rng.uniform(0.5, 14.0, (h, w))
    tables = np.ascontiguousarray(np.sort(rng.uniform(0.01, 0.6, (3, 256)), axis=1))
    t_vert = rng.uniform(0.7, 1.0, 3)
    background = rng.uniform(0.4, 0.8, 3)
    out = np.empty_like(phi)

    def run():
        backend.color_shift_apply(phi, depth, tables, 0.5, 13.5 / 255, t_vert, background, out)

    return timeit(run, repeats)


def bench_stamps(backend, repeats):
    rng = np.random.default_rng(1)
    patch = rng.random((43, 43))
    xs = rng.integers(0, 1344, 80).astype(np.int64)
    ys = rng.integers(0, 756, 80).astype(np.int64)

    def run():
        layer = np.zeros((756, 1344))
        backend.accumulate_stamps(layer, patch, xs, ys)

    return timeit(run, repeats)


def bench_pair(repeats):
    # end-to-end synthesis with whichever backend was selected at import
    from uwsynth.images import RGBDImage
    from uwsynth.pipeline import GenerationConfig, generate_pair
    from uwsynth.spectra import WaterType, default_library

    rng = np.random.default_rng(2)
    h, w = 756, 1344
    rgbd = RGBDImage(
        id="bench",
        rgb=rng.random((h, w, 3)),
        raw_depth=rng.uniform(100, 40000, (h, w)),
    )
    library = default_library()
    config = GenerationConfig()

    def run():
        generate_pair(rgbd, config, WaterType.II, 7, library)

    return timeit(run, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5, help="best-of-N timing")
    args = parser.parse_args()

    from uwsynth._kernels import BACKEND

    print(f"selected backend: {BACKEND}")
    rows = []
    py_cs = bench_color_shift(pyref, args.repeats)
    py_st = bench_stamps(pyref, args.repeats)
    rows.append(("color_shift_apply 1344x756", py_cs, None))
    rows.append(("accumulate_stamps 80x43^2", py_st, None))
    if _native is not None:
        rows[0] = (rows[0][0], py_cs, bench_color_shift(_native, args.repeats))
        rows[1] = (rows[1][0], py_st, bench_stamps(_native, args.repeats))

    print(f"{'kernel':<30} {'numpy':>10} {'native':>10} {'speedup':>8}")
    for name, py_t, nat_t in rows:
        if nat_t is None:
            print(f"{name:<30} {py_t * 1e3:>8.2f}ms {'n/a':>10} {'n/a':>8}")
        else:
            print(f"{name:<30} {py_t * 1e3:>8.2f}ms {nat_t * 1e3:>8.2f}ms {py_t / nat_t:>7.1f}x")

    pair = bench_pair(args.repeats)
    print(f"{'generate_pair (selected)':<30} {pair * 1e3:>8.2f}ms")


if __name__ == "__main__":
    main()
