import json

import numpy as np
import pytest
from jsonschema import validate

import panelrect as pr
from panelrect import files
from panelrect.geometry import GeometryError
from panelrect.mask import LabelMask, MaskPipelineError


def test_image_round_trip(tmp_path):
    img = pr.texture_pattern(120, 90)
    path = tmp_path / "img.png"
    files.save_image(path, img)
    assert np.array_equal(files.load_image(path), img)


def test_mask_round_trip(tmp_path, panel_bundle):
    _, mask, _ = panel_bundle
    path = tmp_path / "mask.png"
    files.save_mask(path, mask)
    loaded = files.load_mask(path)
    assert np.array_equal(loaded.labels, mask.labels)
    assert loaded.class_ids == mask.class_ids


def test_mask_class_ceiling(tmp_path):
    big = LabelMask(np.full((4, 4), 300, dtype=np.int32))
    with pytest.raises(MaskPipelineError):
        files.save_mask(tmp_path / "m.png", big)


def test_corner_file_round_trip(tmp_path, panel_bundle, k):
    corners, _, _ = panel_bundle
    path = tmp_path / "corners.json"
    files.save_corner_file(path, corners, intrinsics=k, labels=[1, 2])
    loaded, loaded_k, labels = files.load_corner_file(path)
    assert np.array_equal(loaded.points, corners.points)
    assert loaded_k == k
    assert labels == [1, 2]


def test_corner_file_without_intrinsics(tmp_path, panel_bundle):
    corners, _, _ = panel_bundle
    path = tmp_path / "corners.json"
    files.save_corner_file(path, corners)
    _, loaded_k, labels = files.load_corner_file(path)
    assert loaded_k is None
    assert labels == [1, 2]


def test_corner_file_rejects_shuffled_order(tmp_path, panel_bundle):
    corners, _, _ = panel_bundle
    path = tmp_path / "corners.json"
    files.save_corner_file(path, corners)
    doc = json.loads(path.read_text())
    doc["buttons"][0]["corners"] = doc["buttons"][0]["corners"][::-1]
    path.write_text(json.dumps(doc))
    with pytest.raises(GeometryError):
        files.load_corner_file(path)


def test_corner_file_rejects_wrong_schema(tmp_path):
    path = tmp_path / "corners.json"
    path.write_text(json.dumps({"schema_version": 99, "buttons": []}))
    with pytest.raises(GeometryError):
        files.load_corner_file(path)


def test_corner_file_requires_pixel_frame(tmp_path, panel_bundle, k):
    corners, _, _ = panel_bundle
    sp = pr.back_project(pr.to_homogeneous(corners), k)
    with pytest.raises(GeometryError):
        files.save_corner_file(tmp_path / "bad.json", sp)


def test_pose_file_round_trip(tmp_path):
    pose = pr.PoseHypothesis(4.5, -3.0, 12.0, t=[0.1, -0.2, 0.05])
    path = tmp_path / "pose.json"
    files.save_pose_file(path, pose, extra={"note": "fixture"})
    loaded = files.load_pose_file(path)
    assert (loaded.theta_x, loaded.theta_y, loaded.theta_z) == (4.5, -3.0, 12.0)
    assert np.allclose(loaded.t, [0.1, -0.2, 0.05])
    assert json.loads(path.read_text())["note"] == "fixture"


def test_report_matches_schema(panel_bundle, k):
    corners, _, _ = panel_bundle
    det = pr.distort_corners(corners, pr.PoseHypothesis(5.0, -5.0, 0.0), k)
    result = pr.search_pose(det, corners, k, pr.SearchConfig(alpha=-10, beta=10, gamma=5.0))
    report = files.build_report(
        result,
        residual_before=pr.evaluate(det, k),
        residual_after=result.residual_cos_norm,
        workers=1,
        coarse_to_fine=False,
    )
    validate(report, files.REPORT_SCHEMA)
    assert report["angles_deg"] == [5.0, -5.0, 0.0]
    assert report["residual_before"] > report["residual_after"]
    assert json.dumps(report)  # serializable without numpy leftovers
