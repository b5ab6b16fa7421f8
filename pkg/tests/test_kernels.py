"""Both kernel backends must agree on identical inputs."""

import math

import numpy as np
import pytest

from panelrect import kernels


def _rot(ax, ay, az):
    cx, sx = math.cos(ax), math.sin(ax)
    cy, sy = math.cos(ay), math.sin(ay)
    cz, sz = math.cos(az), math.sin(az)
    rx = np.array([[1, 0, 0], [0, cx, sx], [0, -sx, cx]])
    ry = np.array([[cy, 0, -sy], [0, 1, 0], [sy, 0, cy]])
    rz = np.array([[cz, sz, 0], [-sz, cz, 0], [0, 0, 1]])
    return rx, ry @ rz


def _sweep_inputs(seed=0, m=40, buttons=2):
    rng = np.random.default_rng(seed)
    angles = rng.uniform(-0.6, 0.6, size=(m, 3))
    rx, _ = _rot(rng.uniform(-0.6, 0.6), 0.0, 0.0)
    ryrz = np.stack([_rot(0.0, a, b)[1] for _, a, b in angles])
    d = rng.uniform(-0.8, 0.8, size=(3, 4 * buttons))
    d[2] = 1.0
    e1 = np.array([0.1, -0.2, 1.0])
    return rx, np.ascontiguousarray(ryrz), np.ascontiguousarray(d), e1


class TestSweepSlice:
    def test_loop_matches_vectorized(self):
        rx, ryrz, d, e1 = _sweep_inputs(seed=1)
        a = kernels.sweep_slice_numpy(rx, ryrz, d, e1, np.empty((len(ryrz), 3)))
        b = kernels._sweep_slice_py(rx, ryrz, d, e1, np.empty((len(ryrz), 3)))
        assert np.abs(a - b).max() <= 1e-12

    def test_active_backend_matches_vectorized(self):
        rx, ryrz, d, e1 = _sweep_inputs(seed=2)
        a = kernels.sweep_slice_numpy(rx, ryrz, d, e1, np.empty((len(ryrz), 3)))
        b = kernels.sweep_slice(rx, ryrz, d, e1, np.empty((len(ryrz), 3)))
        assert np.abs(a - b).max() <= 1e-12

    def test_degenerate_depth_marked_nan(self):
        rx, ryrz, d, e1 = _sweep_inputs(seed=3, m=1)
        ryrz[0] = np.eye(3)
        rx = np.eye(3)
        e1 = np.array([0.0, 0.0, 0.0])  # forces depth ~0 at the first corner
        a = kernels.sweep_slice_numpy(rx, ryrz, d, e1, np.empty((1, 3)))
        b = kernels._sweep_slice_py(rx, ryrz, d, e1, np.empty((1, 3)))
        assert np.all(np.isnan(a)) and np.all(np.isnan(b))

    def test_sentinel_for_vertical_edges(self):
        # axis-aligned square: horizontal slopes 0, vertical edges hit the clamp
        d = np.array(
            [[0.0, 0.2, 0.2, 0.0], [0.0, 0.0, 0.2, 0.2], [1.0, 1.0, 1.0, 1.0]]
        )
        e1 = np.array([0.0, 0.0, 1.0])
        ryrz = np.eye(3)[None]
        out = kernels.sweep_slice_numpy(np.eye(3), ryrz, d, e1, np.empty((1, 3)))
        assert out[0, 0] == 0.0
        assert out[0, 1] == pytest.approx(1.0 / kernels.SLOPE_SENTINEL)
        assert out[0, 2] == 0.0


class TestHoughAccumulate:
    def _inputs(self, seed=0, points=300, nthetas=180):
        rng = np.random.default_rng(seed)
        xs = rng.uniform(0, 200, points)
        ys = rng.uniform(0, 150, points)
        thetas = np.arange(nthetas) * math.pi / nthetas
        return xs, ys, np.cos(thetas), np.sin(thetas)

    def test_loop_matches_vectorized(self):
        xs, ys, cos_t, sin_t = self._inputs(seed=4)
        nrho = 512
        a = kernels.hough_accumulate_numpy(
            xs, ys, cos_t, sin_t, -255.0, 1.0, np.zeros((nrho, len(cos_t)), np.int64)
        )
        b = kernels._hough_accumulate_py(
            xs, ys, cos_t, sin_t, -255.0, 1.0, np.zeros((nrho, len(cos_t)), np.int64)
        )
        assert np.array_equal(a, b)

    def test_active_backend_matches_vectorized(self):
        xs, ys, cos_t, sin_t = self._inputs(seed=5)
        nrho = 512
        a = kernels.hough_accumulate_numpy(
            xs, ys, cos_t, sin_t, -255.0, 1.0, np.zeros((nrho, len(cos_t)), np.int64)
        )
        b = kernels.hough_accumulate(
            xs, ys, cos_t, sin_t, -255.0, 1.0, np.zeros((nrho, len(cos_t)), np.int64)
        )
        assert np.array_equal(a, b)

    def test_total_votes(self):
        xs, ys, cos_t, sin_t = self._inputs(seed=6, points=57)
        acc = kernels.hough_accumulate_numpy(
            xs, ys, cos_t, sin_t, -255.0, 1.0, np.zeros((512, len(cos_t)), np.int64)
        )
        assert acc.sum() == 57 * len(cos_t)


class TestWarp:
    def _homography(self):
        return np.array(
            [
                [0.95, 0.08, 3.0],
                [-0.05, 1.02, -2.0],
                [1e-4, -5e-5, 1.0],
            ]
        )

    def test_loop_matches_vectorized(self):
        rng = np.random.default_rng(7)
        src = rng.uniform(0, 255, size=(60, 80, 1))
        h = self._homography()
        a = kernels.warp_bilinear_numpy(src, h, np.empty((60, 80, 1)))
        b = kernels._warp_bilinear_py(src, h, np.empty((60, 80, 1)))
        assert np.abs(a - b).max() <= 1e-9

    def test_active_backend_matches_vectorized(self):
        rng = np.random.default_rng(8)
        src = rng.uniform(0, 255, size=(60, 80, 1))
        h = self._homography()
        a = kernels.warp_bilinear_numpy(src, h, np.empty((60, 80, 1)))
        b = kernels.warp_bilinear(src, h, np.empty((60, 80, 1)))
        assert np.abs(a - b).max() <= 1e-9

    def test_identity_warp_is_exact(self):
        rng = np.random.default_rng(9)
        src = rng.uniform(0, 255, size=(40, 50, 1))
        out = kernels.warp_bilinear_numpy(src, np.eye(3), np.empty((40, 50, 1)))
        assert np.abs(out - src).max() <= 1e-12

    def test_nearest_identity_is_exact(self):
        rng = np.random.default_rng(10)
        src = rng.integers(0, 5, size=(40, 50)).astype(np.int32)
        out = kernels.warp_nearest(src, np.eye(3), np.empty((40, 50), np.int32))
        assert np.array_equal(out, src)

    def test_out_of_frame_zero_filled(self):
        src = np.full((20, 20, 1), 200.0)
        shift = np.array([[1.0, 0.0, 100.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        out = kernels.warp_bilinear_numpy(src, shift, np.empty((20, 20, 1)))
        assert np.all(out == 0.0)
