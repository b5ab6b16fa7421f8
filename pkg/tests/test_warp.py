import numpy as np
import pytest

import panelrect as pr
from panelrect.geometry import GeometryError, apply_homography, pose_to_homography
from panelrect.warp import overlay_corners, warp_by_matrix, warp_image


@pytest.fixture(scope="module")
def pattern():
    return pr.texture_pattern(320, 240)


def test_identity_is_lossless(pattern):
    out = warp_by_matrix(pattern, np.eye(3))
    assert out.dtype == np.uint8
    assert np.array_equal(out, pattern)


def test_constant_image_stays_constant(pattern):
    src = np.full((100, 120), 77, dtype=np.uint8)
    small_k = pr.Intrinsics(fx=100.0, fy=100.0, ox=60.0, oy=50.0)
    h = pose_to_homography(pr.PoseHypothesis(5.0, -8.0, 3.0), small_k)
    out = warp_by_matrix(src, h, out_size=(120, 100))
    interior = out[30:70, 40:80]
    assert np.all((interior == 77) | (interior == 0))
    assert np.any(interior == 77)


def test_out_size(pattern):
    out = warp_by_matrix(pattern, np.eye(3), out_size=(64, 48))
    assert out.shape == (48, 64)
    assert np.array_equal(out, pattern[:48, :64])


def test_forward_map_consistency(pattern):
    """A destination pixel equals the source pixel its matrix points at."""
    h = np.array([[1.0, 0.0, 12.0], [0.0, 1.0, 7.0], [0.0, 0.0, 1.0]])
    out = warp_by_matrix(pattern, h)
    assert np.array_equal(out[:-7, :-12], pattern[7:, 12:])


def test_rejects_unknown_interpolation(pattern):
    with pytest.raises(GeometryError):
        warp_by_matrix(pattern, np.eye(3), interpolation="cubic")


def test_rejects_bad_shapes():
    with pytest.raises(GeometryError):
        warp_by_matrix(np.zeros((4, 4, 7)), np.eye(3))


def test_nearest_preserves_label_values(pattern):
    labels = np.zeros((100, 100), dtype=np.int32)
    labels[20:60, 30:70] = 3
    h = pose_to_homography(pr.PoseHypothesis(0, 0, 10.0), pr.DEFAULT_INTRINSICS)
    out = warp_by_matrix(labels, h, interpolation="nearest")
    assert set(np.unique(out)) <= {0, 3}


def test_quarter_turn_round_trip(k):
    """theta_z = +-90 degrees in sequence restores the interior exactly
    up to interpolation error."""
    src = pr.texture_pattern(640, 480)
    once = warp_image(src, pr.PoseHypothesis(0, 0, 90.0), k)
    back = warp_image(once, pr.PoseHypothesis(0, 0, -90.0), k)
    # region guaranteed to stay inside the frame through both turns
    interior = (slice(220, 260), slice(300, 340))
    mae = np.abs(back[interior].astype(float) - src[interior].astype(float)).mean()
    assert mae <= 2.0


def test_rectification_matches_corner_mapping(k, panel_bundle):
    """Warping the image and mapping corners through H must agree."""
    corners, _, raster = panel_bundle
    pose = pr.PoseHypothesis(9.0, -6.0, 4.0)
    h = pose_to_homography(pose, k)
    mapped = apply_homography(h, corners.points)
    rectified = warp_image(raster, pose, k)
    background = 30  # reference background gray level
    for src_quad, dst_quad in zip(corners.points, mapped):
        cx, cy = dst_quad.mean(axis=0)
        sx, sy = src_quad.mean(axis=0)
        src_val = raster[int(round(sy)), int(round(sx))]
        got = rectified[int(round(cy)), int(round(cx))]
        assert got == src_val != background


def test_overlay_marks_requested_pixels(panel_bundle):
    corners, _, raster = panel_bundle
    rgb = overlay_corners(raster, corners)
    assert rgb.shape == raster.shape + (3,)
    x, y = corners.points[0, 0]
    assert tuple(rgb[int(round(y)), int(round(x))]) == (255, 0, 0)
    # original image untouched
    assert raster.ndim == 2


def test_overlay_requires_pixel_frame(panel_bundle, k):
    corners, _, raster = panel_bundle
    sp = pr.back_project(pr.to_homogeneous(corners), k)
    with pytest.raises(GeometryError):
        overlay_corners(raster, sp)
