"""Pinhole camera model, corner-set frames, and rotation/translation algebra.

Conventions: points are column vectors, matrices act on the left, image
y grows downward. Rotation angles are stored in degrees and converted to
radians only when a matrix is built.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class GeometryError(ValueError):
    pass


class DegenerateDepthError(GeometryError):
    """A corner's depth collapsed toward zero before homogeneous division."""


class Frame(enum.Enum):
    PIXEL = "pixel"
    NORMALIZED = "normalized"
    SPATIAL = "spatial"


DEPTH_EPS = 1e-9


def deg_to_rad(angle):
    """Degrees to radians: angle * pi / 180."""
    return angle * math.pi / 180.0


def rotation_x(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, -s, c]])


def rotation_y(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])


def rotation_z(theta):
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole camera matrix: focal ratios (pixels) and principal point."""

    fx: float
    fy: float
    ox: float
    oy: float

    def __post_init__(self):
        vals = (self.fx, self.fy, self.ox, self.oy)
        if not all(math.isfinite(v) for v in vals):
            raise GeometryError("intrinsics must be finite")
        if self.fx <= 0 or self.fy <= 0:
            raise GeometryError("focal ratios must be positive")

    def matrix(self):
        return np.array(
            [[self.fx, 0.0, self.ox], [0.0, self.fy, self.oy], [0.0, 0.0, 1.0]]
        )

    def inverse_matrix(self):
        return np.array(
            [
                [1.0 / self.fx, 0.0, -self.ox / self.fx],
                [0.0, 1.0 / self.fy, -self.oy / self.fy],
                [0.0, 0.0, 1.0],
            ]
        )


#: default camera used when no intrinsics are supplied
DEFAULT_INTRINSICS = Intrinsics(fx=320.0, fy=320.0, ox=320.0, oy=240.0)


@dataclass(frozen=True)
class CornerSet:
    """Ordered per-button corner quadruples in one of three frames.

    ``points`` has shape (b, 4, 2) in the pixel frame and (b, 4, 3)
    otherwise. Corner order within a button: 1 -> 2 spans the top
    (horizontal) edge, 1 -> 4 the left (vertical) edge.
    """

    frame: Frame
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        object.__setattr__(self, "points", pts)
        if pts.ndim != 3 or pts.shape[1] != 4:
            raise GeometryError("points must have shape (b, 4, dim)")
        if pts.shape[0] < 1:
            raise GeometryError("at least one button is required")
        want = 2 if self.frame is Frame.PIXEL else 3
        if pts.shape[2] != want:
            raise GeometryError(
                f"{self.frame.value} frame needs {want}-vectors, got {pts.shape[2]}"
            )
        if self.frame is Frame.NORMALIZED and not np.all(pts[:, :, 2] == 1.0):
            raise GeometryError("normalized frame requires third coordinate 1")
        pts.setflags(write=False)

    @property
    def button_count(self):
        return self.points.shape[0]

    @property
    def corner_count(self):
        return 4 * self.points.shape[0]

    def columns(self):
        """Corners as a (dim, N) column matrix, buttons concatenated in order."""
        return self.points.reshape(-1, self.points.shape[2]).T


@dataclass(frozen=True)
class PoseHypothesis:
    """Per-axis rotation angles in degrees plus a translation vector."""

    theta_x: float
    theta_y: float
    theta_z: float
    t: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.float64)
        if t.shape != (3,):
            raise GeometryError("translation must be a 3-vector")
        t.setflags(write=False)
        object.__setattr__(self, "t", t)

    def rotation_matrix(self):
        return compose_rotation(self)


def compose_rotation(pose):
    """R = R_x(theta_x) * R_y(theta_y) * R_z(theta_z), angles in degrees."""
    return (
        rotation_x(deg_to_rad(pose.theta_x))
        @ rotation_y(deg_to_rad(pose.theta_y))
        @ rotation_z(deg_to_rad(pose.theta_z))
    )


def to_homogeneous(corners):
    """Append a unit third coordinate to pixel-frame corners."""
    if corners.frame is not Frame.PIXEL:
        raise GeometryError("to_homogeneous expects the pixel frame")
    pts = np.concatenate(
        [corners.points, np.ones(corners.points.shape[:2] + (1,))], axis=2
    )
    return CornerSet(Frame.NORMALIZED, pts)


def back_project(corners, k):
    """Map normalized-homogeneous corners onto the depth-1 plane via K^-1."""
    if corners.frame is not Frame.NORMALIZED:
        raise GeometryError("back_project expects the normalized frame")
    pts = corners.points @ k.inverse_matrix().T
    return CornerSet(Frame.SPATIAL, pts)


def project(corners, k):
    """Project depth-1 spatial corners back to pixel-homogeneous coordinates."""
    if corners.frame is not Frame.SPATIAL:
        raise GeometryError("project expects the spatial frame")
    pts = corners.points @ k.matrix().T
    return CornerSet(Frame.NORMALIZED, pts)


def pixel_coordinates(corners):
    """Drop the homogeneous row of a normalized corner set."""
    if corners.frame is not Frame.NORMALIZED:
        raise GeometryError("pixel_coordinates expects the normalized frame")
    return CornerSet(Frame.PIXEL, corners.points[:, :, :2])


def apply_pose(corners, pose):
    """Rotate, translate, and depth-normalize spatial corners."""
    if corners.frame is not Frame.SPATIAL:
        raise GeometryError("apply_pose expects the spatial frame")
    r = compose_rotation(pose)
    pts = corners.points @ r.T + pose.t
    z = pts[:, :, 2]
    if np.any(np.abs(z) < DEPTH_EPS):
        raise DegenerateDepthError("corner depth collapsed toward zero")
    return CornerSet(Frame.SPATIAL, pts / z[:, :, None])


def translation_align_first_corner(detected, reference, r):
    """T = e1 - R*d1 so that the first detected corner lands on the first
    reference corner after rotation."""
    if detected.frame is not Frame.SPATIAL or reference.frame is not Frame.SPATIAL:
        raise GeometryError("translation alignment expects spatial corner sets")
    d1 = detected.points[0, 0]
    e1 = reference.points[0, 0]
    return e1 - r @ d1


def pose_to_homography(pose, k):
    """Closed-form pixel homography equivalent to back-project, pose, project.

    H = K (R + T e3^T) K^-1; applying H with homogeneous division to a pixel
    reproduces the explicit three-step chain.
    """
    r = compose_rotation(pose)
    m = r + np.outer(pose.t, np.array([0.0, 0.0, 1.0]))
    h = k.matrix() @ m @ k.inverse_matrix()
    if np.linalg.cond(h) >= 1e12:
        raise GeometryError("degenerate pose: homography is near singular")
    return h


def apply_homography(h, xy):
    """Apply a 3x3 homography to an (..., 2) array of pixel coordinates."""
    xy = np.asarray(xy, dtype=np.float64)
    ones = np.ones(xy.shape[:-1] + (1,))
    p = np.concatenate([xy, ones], axis=-1) @ h.T
    z = p[..., 2]
    if np.any(np.abs(z) < DEPTH_EPS):
        raise DegenerateDepthError("homography sent a point to infinity")
    return p[..., :2] / z[..., None]
