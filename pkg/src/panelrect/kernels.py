"""Hot numeric kernels with optional numba acceleration.

Every kernel has a pure-numpy implementation; when numba is importable and
the ``PANELRECT_NO_NUMBA`` environment variable is unset, an ``@njit``
compiled variant is used instead. Both variants fill caller-allocated
output arrays with the same algorithm; within a backend, results are
bit-reproducible for any worker count because workers write disjoint slots.
"""

import math
import os

import numpy as np

#: |slope| clamp for vertical edges; keeps the grid sweep total and branch-free
SLOPE_SENTINEL = 1e12
#: horizontal run below this counts as a vertical edge
EPS_DX = 1e-12
#: |depth| below this before homogeneous division marks a degenerate hypothesis
EPS_DEPTH = 1e-9

_DISABLE = os.environ.get("PANELRECT_NO_NUMBA", "").lower() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:  # pragma: no cover
        HAS_NUMBA = False
else:
    HAS_NUMBA = False


# ---------------------------------------------------------------------------
# pose sweep
# ---------------------------------------------------------------------------

def sweep_slice_numpy(rx, ryrz, d, e1, out):
    """Score every (theta_y, theta_z) hypothesis for one fixed theta_x.

    rx      (3,3)    rotation about x for this slice
    ryrz    (m,3,3)  precomputed R_y @ R_z products, one per hypothesis
    d       (3,N)    detected corners on the depth-1 plane, N = 4*buttons
    e1      (3,)     first reference corner on the depth-1 plane
    out     (m,3)    filled with (kh_norm, krv, cos_norm); NaN if degenerate
    """
    r = rx @ ryrz  # (m,3,3)
    p = r @ d  # (m,3,N)
    t = e1[None, :] - r @ d[:, 0]  # (m,3)
    p += t[:, :, None]
    z = p[:, 2, :]
    bad = np.abs(z) < EPS_DEPTH  # (m,N)
    zsafe = np.where(bad, 1.0, z)
    x = p[:, 0, :] / zsafe
    y = p[:, 1, :] / zsafe

    nb = d.shape[1] // 4
    x = x.reshape(-1, nb, 4)
    y = y.reshape(-1, nb, 4)
    dxh = x[:, :, 1] - x[:, :, 0]
    dyh = y[:, :, 1] - y[:, :, 0]
    dxv = x[:, :, 3] - x[:, :, 0]
    dyv = y[:, :, 3] - y[:, :, 0]

    kh = np.where(np.abs(dxh) < EPS_DX, SLOPE_SENTINEL, dyh / np.where(np.abs(dxh) < EPS_DX, 1.0, dxh))
    kv = np.where(np.abs(dxv) < EPS_DX, SLOPE_SENTINEL, dyv / np.where(np.abs(dxv) < EPS_DX, 1.0, dxv))
    np.clip(np.abs(kh), None, SLOPE_SENTINEL, out=kh)
    np.clip(np.abs(kv), None, SLOPE_SENTINEL, out=kv)

    hn = np.hypot(dxh, dyh)
    vn = np.hypot(dxv, dyv)
    edge_bad = (hn < EPS_DX) | (vn < EPS_DX)
    hn = np.where(edge_bad, 1.0, hn)
    vn = np.where(edge_bad, 1.0, vn)
    cs = (dxh * dxv + dyh * dyv) / (hn * vn)

    out[:, 0] = np.sqrt(np.sum(kh * kh, axis=1))
    sv = np.sum(kv * kv, axis=1)
    out[:, 1] = np.where(sv > 0.0, 1.0 / np.sqrt(np.where(sv > 0.0, sv, 1.0)), SLOPE_SENTINEL)
    out[:, 2] = np.sqrt(np.sum(cs * cs, axis=1))
    out[bad.any(axis=1) | edge_bad.any(axis=1)] = np.nan
    return out


def _sweep_slice_py(rx, ryrz, d, e1, out):
    m = ryrz.shape[0]
    n = d.shape[1]
    nb = n // 4
    x = np.empty(n)
    y = np.empty(n)
    for hyp in range(m):
        r = rx @ ryrz[hyp]
        tx = e1[0] - (r[0, 0] * d[0, 0] + r[0, 1] * d[1, 0] + r[0, 2] * d[2, 0])
        ty = e1[1] - (r[1, 0] * d[0, 0] + r[1, 1] * d[1, 0] + r[1, 2] * d[2, 0])
        tz = e1[2] - (r[2, 0] * d[0, 0] + r[2, 1] * d[1, 0] + r[2, 2] * d[2, 0])
        ok = True
        for j in range(n):
            px = r[0, 0] * d[0, j] + r[0, 1] * d[1, j] + r[0, 2] * d[2, j] + tx
            py = r[1, 0] * d[0, j] + r[1, 1] * d[1, j] + r[1, 2] * d[2, j] + ty
            pz = r[2, 0] * d[0, j] + r[2, 1] * d[1, j] + r[2, 2] * d[2, j] + tz
            if abs(pz) < EPS_DEPTH:
                ok = False
                break
            x[j] = px / pz
            y[j] = py / pz
        if not ok:
            out[hyp, 0] = np.nan
            out[hyp, 1] = np.nan
            out[hyp, 2] = np.nan
            continue
        sh = 0.0
        sv = 0.0
        sc = 0.0
        for b in range(nb):
            i0 = 4 * b
            dxh = x[i0 + 1] - x[i0]
            dyh = y[i0 + 1] - y[i0]
            dxv = x[i0 + 3] - x[i0]
            dyv = y[i0 + 3] - y[i0]
            if abs(dxh) < EPS_DX:
                kh = SLOPE_SENTINEL
            else:
                kh = abs(dyh / dxh)
                if kh > SLOPE_SENTINEL:
                    kh = SLOPE_SENTINEL
            if abs(dxv) < EPS_DX:
                kv = SLOPE_SENTINEL
            else:
                kv = abs(dyv / dxv)
                if kv > SLOPE_SENTINEL:
                    kv = SLOPE_SENTINEL
            hn = math.hypot(dxh, dyh)
            vn = math.hypot(dxv, dyv)
            if hn < EPS_DX or vn < EPS_DX:
                ok = False
                break
            cs = (dxh * dxv + dyh * dyv) / (hn * vn)
            sh += kh * kh
            sv += kv * kv
            sc += cs * cs
        if not ok:
            out[hyp, 0] = np.nan
            out[hyp, 1] = np.nan
            out[hyp, 2] = np.nan
            continue
        out[hyp, 0] = math.sqrt(sh)
        out[hyp, 1] = 1.0 / math.sqrt(sv) if sv > 0.0 else SLOPE_SENTINEL
        out[hyp, 2] = math.sqrt(sc)
    return out


# ---------------------------------------------------------------------------
# Hough accumulator
# ---------------------------------------------------------------------------

def hough_accumulate_numpy(xs, ys, cos_t, sin_t, rho_min, rho_step, acc):
    """Vote boundary pixels into a (rho, theta) accumulator.

    xs, ys          (P,)   pixel coordinates, float64
    cos_t, sin_t    (T,)   per-theta-bin direction cosines
    acc             (R,T)  int64 accumulator, incremented in place
    """
    rho = xs[:, None] * cos_t[None, :] + ys[:, None] * sin_t[None, :]
    idx = np.rint((rho - rho_min) / rho_step).astype(np.int64)
    np.clip(idx, 0, acc.shape[0] - 1, out=idx)
    tbin = np.broadcast_to(np.arange(acc.shape[1], dtype=np.int64), idx.shape)
    np.add.at(acc, (idx.ravel(), tbin.ravel()), 1)
    return acc


def _hough_accumulate_py(xs, ys, cos_t, sin_t, rho_min, rho_step, acc):
    nrho = acc.shape[0]
    for p in range(xs.shape[0]):
        for t in range(cos_t.shape[0]):
            rho = xs[p] * cos_t[t] + ys[p] * sin_t[t]
            idx = int(round((rho - rho_min) / rho_step))
            if idx < 0:
                idx = 0
            elif idx >= nrho:
                idx = nrho - 1
            acc[idx, t] += 1
    return acc


# ---------------------------------------------------------------------------
# inverse warping
# ---------------------------------------------------------------------------

def warp_bilinear_numpy(src, hmat, out):
    """Inverse-map ``out`` pixels through ``hmat`` and bilinear-sample ``src``.

    src   (h,w,c) float64
    hmat  (3,3)   destination-pixel -> source-pixel homography
    out   (oh,ow,c) float64, zero-filled for unmapped pixels
    """
    h, w = src.shape[:2]
    oh, ow = out.shape[:2]
    xs, ys = np.meshgrid(np.arange(ow, dtype=np.float64), np.arange(oh, dtype=np.float64))
    den = hmat[2, 0] * xs + hmat[2, 1] * ys + hmat[2, 2]
    den = np.where(np.abs(den) < 1e-15, 1e-15, den)
    sx = (hmat[0, 0] * xs + hmat[0, 1] * ys + hmat[0, 2]) / den
    sy = (hmat[1, 0] * xs + hmat[1, 1] * ys + hmat[1, 2]) / den
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0
    # pixels exactly on the last row/column still interpolate from the
    # previous cell with fractional weight 1
    edge_x = (x0 == w - 1) & (np.abs(fx) < 1e-9)
    edge_y = (y0 == h - 1) & (np.abs(fy) < 1e-9)
    x0 = np.where(edge_x, x0 - 1, x0)
    fx = np.where(edge_x, fx + 1.0, fx)
    y0 = np.where(edge_y, y0 - 1, y0)
    fy = np.where(edge_y, fy + 1.0, fy)
    valid = (x0 >= 0) & (x0 <= w - 2) & (y0 >= 0) & (y0 <= h - 2)
    x0c = np.clip(x0, 0, w - 2)
    y0c = np.clip(y0, 0, h - 2)
    for c in range(src.shape[2]):
        i00 = src[y0c, x0c, c]
        i01 = src[y0c, x0c + 1, c]
        i10 = src[y0c + 1, x0c, c]
        i11 = src[y0c + 1, x0c + 1, c]
        val = (
            i00 * (1 - fx) * (1 - fy)
            + i01 * fx * (1 - fy)
            + i10 * (1 - fx) * fy
            + i11 * fx * fy
        )
        out[:, :, c] = np.where(valid, val, 0.0)
    return out


def _warp_bilinear_py(src, hmat, out):
    h, w = src.shape[:2]
    oh, ow = out.shape[:2]
    nc = src.shape[2]
    for yy in range(oh):
        for xx in range(ow):
            den = hmat[2, 0] * xx + hmat[2, 1] * yy + hmat[2, 2]
            if abs(den) < 1e-15:
                den = 1e-15
            sx = (hmat[0, 0] * xx + hmat[0, 1] * yy + hmat[0, 2]) / den
            sy = (hmat[1, 0] * xx + hmat[1, 1] * yy + hmat[1, 2]) / den
            x0 = int(math.floor(sx))
            y0 = int(math.floor(sy))
            fx = sx - x0
            fy = sy - y0
            if x0 == w - 1 and abs(fx) < 1e-9:
                x0 -= 1
                fx += 1.0
            if y0 == h - 1 and abs(fy) < 1e-9:
                y0 -= 1
                fy += 1.0
            if x0 < 0 or x0 > w - 2 or y0 < 0 or y0 > h - 2:
                for c in range(nc):
                    out[yy, xx, c] = 0.0
                continue
            for c in range(nc):
                out[yy, xx, c] = (
                    src[y0, x0, c] * (1 - fx) * (1 - fy)
                    + src[y0, x0 + 1, c] * fx * (1 - fy)
                    + src[y0 + 1, x0, c] * (1 - fx) * fy
                    + src[y0 + 1, x0 + 1, c] * fx * fy
                )
    return out


def warp_nearest_numpy(src, hmat, out, fill=0):
    """Nearest-neighbor variant of :func:`warp_bilinear_numpy` (label masks)."""
    h, w = src.shape[:2]
    oh, ow = out.shape[:2]
    xs, ys = np.meshgrid(np.arange(ow, dtype=np.float64), np.arange(oh, dtype=np.float64))
    den = hmat[2, 0] * xs + hmat[2, 1] * ys + hmat[2, 2]
    den = np.where(np.abs(den) < 1e-15, 1e-15, den)
    sx = np.rint((hmat[0, 0] * xs + hmat[0, 1] * ys + hmat[0, 2]) / den).astype(np.int64)
    sy = np.rint((hmat[1, 0] * xs + hmat[1, 1] * ys + hmat[1, 2]) / den).astype(np.int64)
    valid = (sx >= 0) & (sx < w) & (sy >= 0) & (sy < h)
    out[:] = fill
    out[valid] = src[sy[valid], sx[valid]]
    return out


if HAS_NUMBA:
    sweep_slice = njit(cache=True, nogil=True)(_sweep_slice_py)
    hough_accumulate = njit(cache=True, nogil=True)(_hough_accumulate_py)
    warp_bilinear = njit(cache=True, nogil=True)(_warp_bilinear_py)
else:
    sweep_slice = sweep_slice_numpy
    hough_accumulate = hough_accumulate_numpy
    warp_bilinear = warp_bilinear_numpy

# nearest-neighbor warp is cheap either way; numpy version is always used
warp_nearest = warp_nearest_numpy
