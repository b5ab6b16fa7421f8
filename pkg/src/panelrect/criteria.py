"""Slope/angle criteria ranking how fronto-parallel a corner set is.

Three scalar scores per corner set: the two-norm of horizontal edge
slopes, the reciprocal two-norm of vertical edge slopes, and the two-norm
of corner-angle cosines. All three are zero (or, for the reciprocal,
driven toward zero) on an axis-aligned rectangle grid.
"""

from dataclasses import dataclass

import numpy as np

from .geometry import Frame, GeometryError
from .kernels import EPS_DX, SLOPE_SENTINEL


class DegenerateButtonError(GeometryError):
    """A button edge has (near) zero length."""


@dataclass(frozen=True)
class CriterionScores:
    kh_norm: float
    krv: float
    cos_norm: float
    kh_hat: float | None = None
    krv_hat: float | None = None
    cos_hat: float | None = None
    final_cr: float | None = None

    def raw(self):
        return np.array([self.kh_norm, self.krv, self.cos_norm])


def _edges(corners):
    if corners.frame is not Frame.SPATIAL:
        raise GeometryError("criteria expect the spatial frame")
    p = corners.points
    h = p[:, 1] - p[:, 0]  # corner 1 -> 2, top edge
    v = p[:, 3] - p[:, 0]  # corner 1 -> 4, left edge
    return h, v


def _slopes(deltas):
    dx = deltas[:, 0]
    dy = deltas[:, 1]
    vertical = np.abs(dx) < EPS_DX
    k = np.where(vertical, SLOPE_SENTINEL, dy / np.where(vertical, 1.0, dx))
    return np.clip(np.abs(k), None, SLOPE_SENTINEL)


def horizontal_slope_norm(corners):
    """sqrt(sum of squared horizontal edge slopes) over all buttons."""
    h, _ = _edges(corners)
    k = _slopes(h)
    return float(np.sqrt(np.sum(k * k)))


def vertical_slope_reciprocal(corners):
    """1 / sqrt(sum of squared vertical edge slopes); small means vertical."""
    _, v = _edges(corners)
    k = _slopes(v)
    s = float(np.sum(k * k))
    if s == 0.0:
        return SLOPE_SENTINEL
    return 1.0 / np.sqrt(s)


def cosine_norm(corners):
    """sqrt(sum of squared edge-angle cosines), full 3-vectors."""
    h, v = _edges(corners)
    hn = np.linalg.norm(h, axis=1)
    vn = np.linalg.norm(v, axis=1)
    if np.any(hn < EPS_DX) or np.any(vn < EPS_DX):
        raise DegenerateButtonError("zero-length button edge")
    c = np.sum(h * v, axis=1) / (hn * vn)
    return float(np.sqrt(np.sum(c * c)))


def score(corners):
    return CriterionScores(
        kh_norm=horizontal_slope_norm(corners),
        krv=vertical_slope_reciprocal(corners),
        cos_norm=cosine_norm(corners),
    )


def min_max_normalize(values):
    """(v - min) / (max - min) over the candidate population.

    A constant population normalizes to all zeros: it carries no ranking
    information and must not dominate the combined criterion.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("population must be non-empty")
    lo = np.nanmin(v)
    hi = np.nanmax(v)
    if hi - lo < 1e-15:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def final_cr(normalized):
    """Sum of the three min-max-normalized criteria; smaller is better."""
    kh_hat, krv_hat, cos_hat = normalized
    return float(kh_hat) + float(krv_hat) + float(cos_hat)
