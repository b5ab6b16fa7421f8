"""Homography-based inverse image warping and diagnostic overlays."""

import numpy as np

from . import kernels
from .geometry import Frame, GeometryError, pose_to_homography


def _as_channels(img):
    arr = np.asarray(img)
    if arr.ndim == 2:
        return arr[:, :, None], True
    if arr.ndim == 3 and arr.shape[2] in (1, 3):
        return arr, False
    raise GeometryError("image must be HxW or HxWx{1,3}")


def warp_by_matrix(src, sample_matrix, out_size=None, interpolation="bilinear"):
    """Produce each output pixel by sampling ``src`` at ``sample_matrix @ q``.

    ``out_size`` is (width, height); defaults to the source size.
    Unmapped pixels are filled with 0.
    """
    arr, squeeze = _as_channels(src)
    if out_size is None:
        out_w, out_h = arr.shape[1], arr.shape[0]
    else:
        out_w, out_h = out_size
    if interpolation == "bilinear":
        out = np.zeros((out_h, out_w, arr.shape[2]))
        kernels.warp_bilinear(arr.astype(np.float64), np.asarray(sample_matrix, dtype=np.float64), out)
        out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    elif interpolation == "nearest":
        out = np.zeros((out_h, out_w, arr.shape[2]), dtype=arr.dtype)
        for c in range(arr.shape[2]):
            kernels.warp_nearest(arr[:, :, c], np.asarray(sample_matrix, dtype=np.float64), out[:, :, c])
    else:
        raise GeometryError(f"unknown interpolation {interpolation!r}")
    return out[:, :, 0] if squeeze else out


def warp_image(src, pose, k, out_size=None, interpolation="bilinear"):
    """Rectify ``src`` by the pose: destination pixels sample the source
    through the inverse of the pose homography."""
    h = pose_to_homography(pose, k)
    return warp_by_matrix(src, np.linalg.inv(h), out_size, interpolation)


def overlay_corners(img, corners, arm=6, color=(255, 0, 0)):
    """Draw a cross at every corner; returns an RGB copy."""
    if corners.frame is not Frame.PIXEL:
        raise GeometryError("overlay expects pixel-frame corners")
    arr = np.asarray(img)
    if arr.ndim == 2:
        rgb = np.stack([arr] * 3, axis=2).copy()
    else:
        rgb = arr.copy()
    h, w = rgb.shape[:2]
    for x, y in corners.points.reshape(-1, 2):
        cx, cy = int(round(x)), int(round(y))
        for d in range(-arm, arm + 1):
            if 0 <= cy < h and 0 <= cx + d < w:
                rgb[cy, cx + d] = color
            if 0 <= cy + d < h and 0 <= cx < w:
                rgb[cy + d, cx] = color
    return rgb
