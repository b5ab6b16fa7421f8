"""Exhaustive grid search over per-axis rotation angles.

The sweep scores every lattice hypothesis with the three raw criteria,
then min-max normalizes each criterion over the whole population and
selects the smallest combined score. Normalization needs global min/max,
so selection is inherently two-pass: either the raw triples are stored
(about 100 MB for the default 161^3 grid) or the sweep runs twice in
streaming mode.

The per-slice kernel releases the GIL, so worker threads fill disjoint
slices of a pre-sized table; reductions run single-threaded in slice
order, making results identical for any worker count.
"""

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .criteria import CriterionScores
from .geometry import (
    CornerSet,
    Frame,
    GeometryError,
    PoseHypothesis,
    back_project,
    compose_rotation,
    to_homogeneous,
    translation_align_first_corner,
)


class SearchError(GeometryError):
    pass


class NoSolutionError(SearchError):
    """Every hypothesis on the grid was degenerate."""


@dataclass(frozen=True)
class SearchConfig:
    alpha: float = -40.0
    beta: float = 40.0
    gamma: float = 0.5
    coarse_to_fine: bool = False
    worker_count: int = field(default_factory=lambda: os.cpu_count() or 1)
    store_scores: bool = True

    def __post_init__(self):
        if self.alpha >= self.beta:
            raise SearchError("empty grid: alpha must be below beta")
        if self.gamma <= 0:
            raise SearchError("grid step must be positive")
        if self.worker_count < 1:
            raise SearchError("worker_count must be positive")

    def axis(self, step=None):
        """Inclusive lattice from alpha to beta at the given step."""
        step = self.gamma if step is None else step
        n = int(np.floor((self.beta - self.alpha) / step + 1e-9)) + 1
        return self.alpha + step * np.arange(n)


@dataclass(frozen=True)
class SearchResult:
    best_pose: PoseHypothesis
    best_final_cr: float
    raw_scores_best: CriterionScores
    residual_cos_norm: float
    hypotheses_evaluated: int
    elapsed: float


def _rotation_tables(ax_x, ax_y, ax_z):
    from .geometry import deg_to_rad, rotation_x, rotation_y, rotation_z

    rx = np.stack([rotation_x(deg_to_rad(a)) for a in ax_x])
    ry = np.stack([rotation_y(deg_to_rad(a)) for a in ax_y])
    rz = np.stack([rotation_z(deg_to_rad(a)) for a in ax_z])
    ryrz = np.einsum("jab,kbc->jkac", ry, rz).reshape(-1, 3, 3)
    return rx, np.ascontiguousarray(ryrz)


def _spatial_columns(corners, k):
    sp = back_project(to_homogeneous(corners), k)
    return np.ascontiguousarray(sp.columns()), sp


def sweep_raw_scores(detected, reference, k, cfg, axes=None):
    """Raw criterion triples for every lattice hypothesis.

    Returns ``(ax_x, ax_y, ax_z, raw)`` with ``raw`` of shape
    (nx, ny, nz, 3); degenerate hypotheses hold NaN.
    """
    _check_inputs(detected, reference)
    if axes is None:
        ax = cfg.axis()
        axes = (ax, ax, ax)
    ax_x, ax_y, ax_z = axes
    d, _ = _spatial_columns(detected, k)
    e, _ = _spatial_columns(reference, k)
    e1 = np.ascontiguousarray(e[:, 0])
    rx, ryrz = _rotation_tables(ax_x, ax_y, ax_z)
    m = ryrz.shape[0]
    raw = np.empty((len(ax_x), m, 3))

    def run(ix):
        kernels.sweep_slice(rx[ix], ryrz, d, e1, raw[ix])

    _run_slices(run, len(ax_x), cfg.worker_count)
    return ax_x, ax_y, ax_z, raw.reshape(len(ax_x), len(ax_y), len(ax_z), 3)


def _check_inputs(detected, reference):
    if detected.frame is not Frame.PIXEL or reference.frame is not Frame.PIXEL:
        raise SearchError("search expects pixel-frame corner sets")
    if detected.button_count != reference.button_count:
        raise SearchError("detected and reference button counts differ")


def _run_slices(fn, n, workers):
    if workers <= 1 or n <= 1:
        for i in range(n):
            fn(i)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        list(pool.map(fn, range(n)))


def _select(raw_flat, bounds):
    """Normalize against global bounds and return (flat argmin, final CR).

    Scan-order argmin with strict comparison implements the lexicographic
    (theta_x, theta_y, theta_z) tie-break.
    """
    lo, hi = bounds
    span = hi - lo
    final = np.zeros(raw_flat.shape[0])
    for c in range(3):
        if span[c] >= 1e-15:
            final += (raw_flat[:, c] - lo[c]) / span[c]
    final = np.where(np.isnan(raw_flat).any(axis=1), np.inf, final)
    idx = int(np.argmin(final))
    if not np.isfinite(final[idx]):
        raise NoSolutionError("every hypothesis on the grid was degenerate")
    return idx, float(final[idx])


def _bounds(raw_flat):
    valid = ~np.isnan(raw_flat).any(axis=1)
    if not valid.any():
        raise NoSolutionError("every hypothesis on the grid was degenerate")
    v = raw_flat[valid]
    return v.min(axis=0), v.max(axis=0)


def _sweep_streaming(detected, reference, k, cfg, axes):
    """Two sweeps instead of one stored table; identical selection."""
    ax_x, ax_y, ax_z = axes
    d, _ = _spatial_columns(detected, k)
    e, _ = _spatial_columns(reference, k)
    e1 = np.ascontiguousarray(e[:, 0])
    rx, ryrz = _rotation_tables(ax_x, ax_y, ax_z)
    m = ryrz.shape[0]
    nx = len(ax_x)

    slice_lo = np.empty((nx, 3))
    slice_hi = np.empty((nx, 3))
    slice_valid = np.zeros(nx, dtype=bool)

    def pass1(ix):
        buf = np.empty((m, 3))
        kernels.sweep_slice(rx[ix], ryrz, d, e1, buf)
        ok = ~np.isnan(buf).any(axis=1)
        if ok.any():
            slice_valid[ix] = True
            slice_lo[ix] = buf[ok].min(axis=0)
            slice_hi[ix] = buf[ok].max(axis=0)

    _run_slices(pass1, nx, cfg.worker_count)
    if not slice_valid.any():
        raise NoSolutionError("every hypothesis on the grid was degenerate")
    bounds = (slice_lo[slice_valid].min(axis=0), slice_hi[slice_valid].max(axis=0))

    best = [np.inf, -1, None]  # final, flat index, raw triple

    slots = [None] * nx

    def pass2(ix):
        buf = np.empty((m, 3))
        kernels.sweep_slice(rx[ix], ryrz, d, e1, buf)
        try:
            idx, fin = _select(buf, bounds)
        except NoSolutionError:
            return
        slots[ix] = (fin, idx, buf[idx].copy())

    _run_slices(pass2, nx, cfg.worker_count)
    for ix in range(nx):
        if slots[ix] is not None and slots[ix][0] < best[0]:
            best = [slots[ix][0], ix * m + slots[ix][1], slots[ix][2]]
    if best[1] < 0:
        raise NoSolutionError("every hypothesis on the grid was degenerate")
    raw_best = np.empty((1, 3))
    raw_best[0] = best[2]
    return best[1], best[0], raw_best[0], bounds


def _search_axes(detected, reference, k, cfg, axes, dump_path=None):
    ax_x, ax_y, ax_z = axes
    shape = (len(ax_x), len(ax_y), len(ax_z))
    count = int(np.prod(shape))
    if cfg.store_scores:
        _, _, _, raw = sweep_raw_scores(detected, reference, k, cfg, axes)
        flat = raw.reshape(-1, 3)
        if dump_path is not None:
            _dump_scores(dump_path, axes, flat)
        bounds = _bounds(flat)
        idx, fin = _select(flat, bounds)
        raw_best = flat[idx]
    else:
        idx, fin, raw_best, bounds = _sweep_streaming(detected, reference, k, cfg, axes)
    ix, rem = divmod(idx, shape[1] * shape[2])
    iy, iz = divmod(rem, shape[2])
    angles = (float(ax_x[ix]), float(ax_y[iy]), float(ax_z[iz]))
    lo, hi = bounds
    span = hi - lo
    norm = [
        float((raw_best[c] - lo[c]) / span[c]) if span[c] >= 1e-15 else 0.0
        for c in range(3)
    ]
    scores = CriterionScores(
        kh_norm=float(raw_best[0]),
        krv=float(raw_best[1]),
        cos_norm=float(raw_best[2]),
        kh_hat=norm[0],
        krv_hat=norm[1],
        cos_hat=norm[2],
        final_cr=fin,
    )
    return angles, scores, count


def _dump_scores(path, axes, flat):
    ax_x, ax_y, ax_z = axes
    grid = np.stack(np.meshgrid(ax_x, ax_y, ax_z, indexing="ij"), axis=-1).reshape(-1, 3)
    table = np.column_stack([grid, flat])
    np.savetxt(
        path,
        table,
        fmt="%.10g",
        header="theta_x theta_y theta_z kh_norm krv cos_norm",
    )


def _finish(detected, reference, k, angles, scores, count, t0):
    det_sp = back_project(to_homogeneous(detected), k)
    ref_sp = back_project(to_homogeneous(reference), k)
    pose0 = PoseHypothesis(*angles)
    r = compose_rotation(pose0)
    t = translation_align_first_corner(det_sp, ref_sp, r)
    pose = PoseHypothesis(*angles, t=t)
    return SearchResult(
        best_pose=pose,
        best_final_cr=scores.final_cr,
        raw_scores_best=scores,
        residual_cos_norm=scores.cos_norm,
        hypotheses_evaluated=count,
        elapsed=time.perf_counter() - t0,
    )


def search_pose(detected, reference, k, cfg=None, dump_path=None):
    """Full-lattice sweep; returns the combined-criterion argmin."""
    cfg = cfg or SearchConfig()
    t0 = time.perf_counter()
    _check_inputs(detected, reference)
    ax = cfg.axis()
    angles, scores, count = _search_axes(
        detected, reference, k, cfg, (ax, ax, ax), dump_path=dump_path
    )
    return _finish(detected, reference, k, angles, scores, count, t0)


def search_pose_coarse_to_fine(detected, reference, k, cfg=None, dump_path=None):
    """Coarse sweep at step 4*gamma, then a +-8*gamma window at step gamma.

    Matches the full sweep whenever the score landscape is unimodal at the
    coarse scale; the full sweep remains the reference behavior.
    """
    cfg = cfg or SearchConfig()
    t0 = time.perf_counter()
    _check_inputs(detected, reference)
    coarse_ax = cfg.axis(step=4.0 * cfg.gamma)
    c_angles, _, c_count = _search_axes(
        detected, reference, k, cfg, (coarse_ax, coarse_ax, coarse_ax)
    )

    def window(center):
        steps = np.arange(-8, 9)
        vals = center + cfg.gamma * steps
        vals = vals[(vals >= cfg.alpha - 1e-9) & (vals <= cfg.beta + 1e-9)]
        return vals

    axes = tuple(window(a) for a in c_angles)
    angles, scores, f_count = _search_axes(
        detected, reference, k, cfg, axes, dump_path=dump_path
    )
    return _finish(detected, reference, k, angles, scores, c_count + f_count, t0)
