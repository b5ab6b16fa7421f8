#!/usr/bin/env python3
"""Benchmark the accelerated kernels against the pure-numpy fallback.

The package picks its backend at import time (numba when available and
``PANELRECT_NO_NUMBA`` is unset), but both implementations stay importable,
so one process can time them side by side.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import math
import time

import numpy as np

from panelrect import kernels
from panelrect.geometry import DEFAULT_INTRINSICS, PoseHypothesis
from panelrect.search import SearchConfig, search_pose
from panelrect.synth import PanelSpec, distort_corners, generate_reference


def timeit(fn, repeats):
    fn()  # warm-up (numba compilation, caches)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_sweep(repeats):
    rng = np.random.default_rng(0)
    m = 161 * 161  # one theta_x slice of the default lattice
    angles = rng.uniform(-0.7, 0.7, size=(m, 2))
    ryrz = np.empty((m, 3, 3))
    for i, (ay, az) in enumerate(angles):
        cy, sy = math.cos(ay), math.sin(ay)
        cz, sz = math.cos(az), math.sin(az)
        ryrz[i] = np.array([[cy, 0, -sy], [0, 1, 0], [sy, 0, cy]]) @ np.array(
            [[cz, sz, 0], [-sz, cz, 0], [0, 0, 1]]
        )
    rx = np.eye(3)
    d = rng.uniform(-0.8, 0.8, size=(3, 8))
    d[2] = 1.0
    e1 = np.array([0.1, -0.2, 1.0])
    out = np.empty((m, 3))
    return {
        "accelerated": timeit(lambda: kernels.sweep_slice(rx, ryrz, d, e1, out), repeats),
        "numpy": timeit(lambda: kernels.sweep_slice_numpy(rx, ryrz, d, e1, out), repeats),
    }


def bench_hough(repeats):
    rng = np.random.default_rng(1)
    xs = rng.uniform(0, 640, 2000)
    ys = rng.uniform(0, 480, 2000)
    thetas = np.radians(np.arange(180.0))
    cos_t, sin_t = np.cos(thetas), np.sin(thetas)
    acc = np.zeros((1602, 180), dtype=np.int64)
    return {
        "accelerated": timeit(
            lambda: kernels.hough_accumulate(xs, ys, cos_t, sin_t, -801.0, 1.0, acc), repeats
        ),
        "numpy": timeit(
            lambda: kernels.hough_accumulate_numpy(xs, ys, cos_t, sin_t, -801.0, 1.0, acc),
            repeats,
        ),
    }


def bench_warp(repeats):
    rng = np.random.default_rng(2)
    src = rng.uniform(0, 255, size=(480, 640, 1))
    h = np.array([[0.97, 0.05, 4.0], [-0.03, 1.01, -2.0], [1e-4, -5e-5, 1.0]])
    out = np.empty((480, 640, 1))
    return {
        "accelerated": timeit(lambda: kernels.warp_bilinear(src, h, out), repeats),
        "numpy": timeit(lambda: kernels.warp_bilinear_numpy(src, h, out), repeats),
    }


def bench_full_search():
    corners, _, _ = generate_reference(PanelSpec.vertical_pair())
    det = distort_corners(corners, PoseHypothesis(10.0, -7.5, 3.0), DEFAULT_INTRINSICS)
    t0 = time.perf_counter()
    res = search_pose(det, corners, DEFAULT_INTRINSICS, SearchConfig())
    return time.perf_counter() - t0, res.hypotheses_evaluated


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backend = "numba" if kernels.HAS_NUMBA else "numpy (fallback)"
    print(f"active backend: {backend}\n")
    print(f"{'kernel':<18}{'accelerated':>14}{'numpy':>14}{'speedup':>10}")
    for name, fn in (("sweep slice", bench_sweep), ("hough votes", bench_hough), ("warp 640x480", bench_warp)):
        r = fn(args.repeats)
        ratio = r["numpy"] / r["accelerated"] if r["accelerated"] > 0 else math.inf
        print(f"{name:<18}{r['accelerated']*1e3:>11.2f} ms{r['numpy']*1e3:>11.2f} ms{ratio:>9.1f}x")

    elapsed, n = bench_full_search()
    print(f"\nfull pose sweep: {n} hypotheses in {elapsed:.2f} s ({backend})")


if __name__ == "__main__":
    main()
