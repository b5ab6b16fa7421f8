"""Synthetic panel generation: the ground-truth oracle for the pipeline.

Generates axis-aligned reference panels (stacked up/down pair, single
column, or rows x cols grid), applies known poses as exact homographies
to produce distorted fixtures, and scores corner sets with the
edge-angle cosine metric.
"""

from dataclasses import dataclass

import numpy as np

from .criteria import cosine_norm
from .geometry import (
    CornerSet,
    DEFAULT_INTRINSICS,
    Frame,
    GeometryError,
    PoseHypothesis,
    back_project,
    compose_rotation,
    to_homogeneous,
)
from .mask import LabelMask
from .warp import warp_by_matrix


class SynthError(GeometryError):
    pass


@dataclass(frozen=True)
class PanelSpec:
    rows: int = 2
    cols: int = 1
    button_width: int = 80
    button_height: int = 80
    spacing: int = 40
    image_width: int = 640
    image_height: int = 480

    def __post_init__(self):
        if min(self.rows, self.cols, self.button_width, self.button_height) < 1:
            raise SynthError("panel dimensions must be positive")
        if self.spacing < 1:
            raise SynthError("buttons must not touch: spacing must be positive")

    @classmethod
    def vertical_pair(cls, **kw):
        """Stacked two-button panel (the up/down call-button style)."""
        return cls(rows=2, cols=1, **kw)

    @classmethod
    def single_column(cls, n, **kw):
        return cls(rows=n, cols=1, **kw)

    @classmethod
    def grid(cls, rows, cols, **kw):
        return cls(rows=rows, cols=cols, **kw)

    @property
    def button_count(self):
        return self.rows * self.cols

    def corner_grid(self):
        """Axis-aligned button corners centered on the image, reading order."""
        total_w = self.cols * self.button_width + (self.cols - 1) * self.spacing
        total_h = self.rows * self.button_height + (self.rows - 1) * self.spacing
        x0 = (self.image_width - total_w) / 2.0
        y0 = (self.image_height - total_h) / 2.0
        if x0 < 0 or y0 < 0:
            raise SynthError("panel does not fit in the image")
        buttons = []
        for r in range(self.rows):
            for c in range(self.cols):
                bx = x0 + c * (self.button_width + self.spacing)
                by = y0 + r * (self.button_height + self.spacing)
                buttons.append(
                    [
                        [bx, by],
                        [bx + self.button_width, by],
                        [bx + self.button_width, by + self.button_height],
                        [bx, by + self.button_height],
                    ]
                )
        return CornerSet(Frame.PIXEL, np.array(buttons))


def generate_reference(spec):
    """Reference bundle: (pixel CornerSet, LabelMask, grayscale raster)."""
    corners = spec.corner_grid()
    labels = np.zeros((spec.image_height, spec.image_width), dtype=np.int32)
    raster = np.full((spec.image_height, spec.image_width), 30, dtype=np.uint8)
    for i, quad in enumerate(corners.points):
        x0, y0 = quad[0]
        x1, y1 = quad[2]
        sl = (slice(int(round(y0)), int(round(y1))), slice(int(round(x0)), int(round(x1))))
        labels[sl] = i + 1
        raster[sl] = 120 + (i * 37) % 120
    return corners, LabelMask(labels), raster


def _effective_pose(reference_corners, pose, k):
    """Translation consistent with first-corner alignment.

    ``pose.t[:2]`` is read as the displacement of the first corner on the
    depth-1 plane; the returned pose carries the full translation vector
    that the grid search will recover for this distortion.
    """
    ref_sp = back_project(to_homogeneous(reference_corners), k)
    e1 = ref_sp.points[0, 0]
    d1 = e1 - np.array([pose.t[0], pose.t[1], 0.0])
    r = compose_rotation(pose)
    t_eff = e1 - r @ d1
    return PoseHypothesis(pose.theta_x, pose.theta_y, pose.theta_z, t=t_eff)


def distortion_homography(reference_corners, pose, k):
    """Pixel homography H mapping distorted pixels to reference pixels.

    Distorted corners are H^-1 applied to the reference corners, so that
    rectifying with the same pose undoes the distortion exactly.
    """
    from .geometry import pose_to_homography

    eff = _effective_pose(reference_corners, pose, k)
    return pose_to_homography(eff, k), eff


def distort_corners(reference_corners, pose, k=DEFAULT_INTRINSICS, require_in_frame=None):
    """Map reference corners through the inverse distortion homography."""
    if _is_identity(pose):
        return reference_corners
    h, _ = distortion_homography(reference_corners, pose, k)
    from .geometry import apply_homography

    pts = apply_homography(np.linalg.inv(h), reference_corners.points)
    if require_in_frame is not None:
        w, hgt = require_in_frame
        if pts[..., 0].min() < 0 or pts[..., 0].max() > w - 1 or pts[..., 1].min() < 0 or pts[..., 1].max() > hgt - 1:
            raise SynthError("distorted corners fall outside the image")
    return CornerSet(Frame.PIXEL, pts)


def _is_identity(pose):
    return (
        pose.theta_x == 0.0
        and pose.theta_y == 0.0
        and pose.theta_z == 0.0
        and not np.any(pose.t)
    )


def distort(reference_corners, raster, label_mask, pose, k=DEFAULT_INTRINSICS):
    """Forward distortion of a full reference bundle by a known pose.

    Returns (corners, raster, mask); raster is warped bilinearly, the
    label mask with nearest-neighbor to keep labels integral.
    """
    if max(abs(pose.theta_x), abs(pose.theta_y), abs(pose.theta_z)) > 60.0:
        raise SynthError("pose angles beyond +-60 degrees are out of scope")
    if _is_identity(pose):
        return reference_corners, raster.copy(), LabelMask(label_mask.labels.copy())
    h, _ = distortion_homography(reference_corners, pose, k)
    corners = distort_corners(
        reference_corners, pose, k,
        require_in_frame=(label_mask.width, label_mask.height),
    )
    warped_raster = warp_by_matrix(raster, h)
    if _axis_aligned(reference_corners):
        warped_labels = _rasterize_warped_labels(
            reference_corners, h, label_mask.width, label_mask.height
        )
    else:
        warped_labels = warp_by_matrix(
            label_mask.labels.astype(np.int32), h, interpolation="nearest"
        )
    return corners, warped_raster, LabelMask(warped_labels)


def _axis_aligned(corners):
    p = corners.points
    return bool(
        np.all(p[:, 0, 1] == p[:, 1, 1])
        and np.all(p[:, 2, 1] == p[:, 3, 1])
        and np.all(p[:, 0, 0] == p[:, 3, 0])
        and np.all(p[:, 1, 0] == p[:, 2, 0])
    )


def _rasterize_warped_labels(reference_corners, h, width, height):
    """Label a distorted pixel by mapping its center into reference space
    and testing the continuous button rectangles.

    Equivalent to a nearest-neighbor warp of the reference mask but with
    sub-pixel boundary placement, so corner-detection accuracy is not
    limited by a resampling rounding step.
    """
    xs, ys = np.meshgrid(np.arange(width, dtype=np.float64), np.arange(height, dtype=np.float64))
    den = h[2, 0] * xs + h[2, 1] * ys + h[2, 2]
    safe = np.abs(den) > 1e-12
    den = np.where(safe, den, 1.0)
    qx = (h[0, 0] * xs + h[0, 1] * ys + h[0, 2]) / den
    qy = (h[1, 0] * xs + h[1, 1] * ys + h[1, 2]) / den
    labels = np.zeros((height, width), dtype=np.int32)
    for i, quad in enumerate(reference_corners.points):
        x0, y0 = quad[0]
        x1, y1 = quad[2]
        inside = safe & (qx >= x0) & (qx < x1) & (qy >= y0) & (qy < y1)
        labels[inside] = i + 1
    return labels


def evaluate(corners, k=DEFAULT_INTRINSICS):
    """Edge-angle cosine norm of back-projected corners; 0 is perfect."""
    if corners.frame is not Frame.PIXEL:
        raise SynthError("evaluate expects pixel-frame corners")
    return cosine_norm(back_project(to_homogeneous(corners), k))


def texture_pattern(width=640, height=480):
    """Smooth textured grayscale pattern for warp round-trip checks."""
    x, y = np.meshgrid(np.arange(width), np.arange(height))
    v = (
        127.5
        + 55.0 * np.sin(2 * np.pi * x / 48.0) * np.sin(2 * np.pi * y / 37.0)
        + 40.0 * np.sin(2 * np.pi * (x + 2 * y) / 173.0)
    )
    return np.clip(np.rint(v), 0, 255).astype(np.uint8)
