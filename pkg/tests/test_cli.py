"""End-to-end command-line checks: synth -> detect-corners -> rectify -> evaluate."""

import json

import numpy as np
import pytest
from jsonschema import validate

import panelrect as pr
from panelrect import files
from panelrect.cli import main
from panelrect.files import REPORT_SCHEMA


@pytest.fixture(scope="module")
def bundle_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    code = main(["synth", "--out", str(out), "--pose", "12,-8,5"])
    assert code == 0
    return out


def test_synth_bundle_contents(bundle_dir):
    for name in ("image.png", "mask.png", "corners.json", "pose.json"):
        assert (bundle_dir / name).exists()
    pose = files.load_pose_file(bundle_dir / "pose.json")
    assert (pose.theta_x, pose.theta_y, pose.theta_z) == (12.0, -8.0, 5.0)
    corners, k, _ = files.load_corner_file(bundle_dir / "corners.json")
    assert corners.button_count == 2
    assert k == pr.DEFAULT_INTRINSICS


def test_synth_grid_layout(tmp_path):
    out = tmp_path / "grid"
    assert main(["synth", "--out", str(out), "--grid", "3x2", "--button-size", "60"]) == 0
    corners, _, _ = files.load_corner_file(out / "corners.json")
    assert corners.button_count == 6


def test_detect_corners_cli(bundle_dir, tmp_path):
    out = tmp_path / "detected.json"
    overlay = tmp_path / "overlay.png"
    code = main(
        ["detect-corners", str(bundle_dir / "mask.png"), "-o", str(out), "--overlay", str(overlay)]
    )
    assert code == 0
    detected, _, labels = files.load_corner_file(out)
    truth, _, _ = files.load_corner_file(bundle_dir / "corners.json")
    assert labels == [1, 2]
    assert np.abs(detected.points - truth.points).max() <= 2.0
    assert files.load_image(overlay).shape == (480, 640, 3)


def test_detect_corners_partial_failure_exit_code(tmp_path):
    m = np.zeros((300, 200), dtype=np.int32)
    m[30:90, 30:90] = 1
    m[196:204, 10:190] = 2  # undetectable thin bar
    mask_path = tmp_path / "mask.png"
    files.save_mask(mask_path, pr.LabelMask(m))
    code = main(["detect-corners", str(mask_path), "-o", str(tmp_path / "out.json")])
    assert code == 2
    detected, _, labels = files.load_corner_file(tmp_path / "out.json")
    assert labels == [1]


def test_detect_corners_total_failure_exit_code(tmp_path):
    ys, xs = np.mgrid[0:200, 0:200]
    tri = ((xs + ys >= 100) & (ys >= 60) & (ys <= 160) & (xs <= ys)).astype(np.int32)
    mask_path = tmp_path / "mask.png"
    files.save_mask(mask_path, pr.LabelMask(tri))
    code = main(["detect-corners", str(mask_path), "-o", str(tmp_path / "out.json")])
    assert code == 1
    assert not (tmp_path / "out.json").exists()


def test_rectify_from_corners(bundle_dir, tmp_path):
    out = tmp_path / "rectified.png"
    report_path = tmp_path / "report.json"
    code = main(
        [
            "rectify",
            str(bundle_dir / "image.png"),
            "--corners",
            str(bundle_dir / "corners.json"),
            "-o",
            str(out),
            "--report",
            str(report_path),
            "--alpha",
            "-15",
            "--beta",
            "15",
            "--gamma",
            "0.5",
        ]
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    validate(report, REPORT_SCHEMA)
    assert report["angles_deg"] == [12.0, -8.0, 5.0]
    assert report["residual_after"] <= 1e-6
    assert report["residual_before"] > 1e-3
    assert files.load_image(out).shape == (480, 640)


def test_rectify_from_mask_coarse_to_fine(bundle_dir, tmp_path):
    out = tmp_path / "rectified.png"
    report_path = tmp_path / "report.json"
    code = main(
        [
            "rectify",
            str(bundle_dir / "image.png"),
            "--mask",
            str(bundle_dir / "mask.png"),
            "-o",
            str(out),
            "--report",
            str(report_path),
            "--alpha",
            "-20",
            "--beta",
            "20",
            "--coarse-to-fine",
            "--overlay",
            str(tmp_path / "overlay.png"),
        ]
    )
    assert code == 0
    report = json.loads(report_path.read_text())
    validate(report, REPORT_SCHEMA)
    assert report["coarse_to_fine"] is True
    got = np.array(report["angles_deg"])
    assert np.abs(got - [12.0, -8.0, 5.0]).max() <= 1.0
    assert report["residual_after"] < report["residual_before"]
    assert (tmp_path / "overlay.png").exists()


def test_rectify_requires_corner_source(bundle_dir, tmp_path, capsys):
    with pytest.raises(SystemExit):
        main(["rectify", str(bundle_dir / "image.png"), "-o", str(tmp_path / "o.png")])


def test_evaluate_cli(bundle_dir, tmp_path, capsys):
    ref_dir = tmp_path / "ref"
    assert main(["synth", "--out", str(ref_dir)]) == 0
    capsys.readouterr()  # drop the synth status line
    code = main(
        ["evaluate", str(bundle_dir / "corners.json"), str(ref_dir / "corners.json")]
    )
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3  # two files + average
    distorted_score = float(lines[0].split("\t")[1])
    reference_score = float(lines[1].split("\t")[1])
    assert reference_score <= 1e-6
    assert distorted_score > reference_score
    assert lines[2].startswith("average")


def test_missing_file_is_reported(tmp_path, capsys):
    code = main(["evaluate", str(tmp_path / "nope.json")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_dump_scores_flag(bundle_dir, tmp_path):
    out = tmp_path / "r.png"
    dump = tmp_path / "scores.txt"
    code = main(
        [
            "rectify",
            str(bundle_dir / "image.png"),
            "--corners",
            str(bundle_dir / "corners.json"),
            "-o",
            str(out),
            "--alpha",
            "-10",
            "--beta",
            "10",
            "--gamma",
            "5",
            "--dump-scores",
            str(dump),
        ]
    )
    assert code == 0
    assert np.loadtxt(dump).shape == (125, 6)
