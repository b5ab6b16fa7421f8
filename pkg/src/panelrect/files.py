"""On-disk formats: corner/pose/report JSON and 8-bit PNG images."""

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .geometry import CornerSet, Frame, GeometryError, Intrinsics, PoseHypothesis
from .mask import LabelMask, MaskPipelineError, order_corners

CORNER_SCHEMA_VERSION = 1
REPORT_SCHEMA_VERSION = 1

REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "schema_version",
        "angles_deg",
        "translation",
        "best_final_cr",
        "raw_scores",
        "residual_before",
        "residual_after",
        "hypotheses_evaluated",
        "elapsed_s",
    ],
    "properties": {
        "schema_version": {"const": REPORT_SCHEMA_VERSION},
        "angles_deg": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
        "translation": {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3},
        "best_final_cr": {"type": "number"},
        "raw_scores": {
            "type": "object",
            "required": ["kh_norm", "krv", "cos_norm"],
            "properties": {
                "kh_norm": {"type": "number"},
                "krv": {"type": "number"},
                "cos_norm": {"type": "number"},
            },
        },
        "residual_before": {"type": "number"},
        "residual_after": {"type": "number"},
        "hypotheses_evaluated": {"type": "integer", "minimum": 1},
        "elapsed_s": {"type": "number", "minimum": 0},
        "workers": {"type": "integer", "minimum": 1},
        "coarse_to_fine": {"type": "boolean"},
    },
}


def save_image(path, img):
    Image.fromarray(np.asarray(img)).save(path)


def load_image(path):
    return np.asarray(Image.open(path))


def save_mask(path, mask):
    arr = mask.labels
    if arr.max() > 255:
        raise MaskPipelineError("mask has more than 255 classes")
    Image.fromarray(arr.astype(np.uint8), mode="L").save(path)


def load_mask(path):
    img = Image.open(path)
    if img.mode != "L":
        img = img.convert("L")
    return LabelMask(np.asarray(img, dtype=np.int32))


def save_corner_file(path, corners, intrinsics=None, labels=None):
    if corners.frame is not Frame.PIXEL:
        raise GeometryError("corner files store pixel coordinates")
    if labels is None:
        labels = list(range(1, corners.button_count + 1))
    doc = {
        "schema_version": CORNER_SCHEMA_VERSION,
        "buttons": [
            {"label": int(lab), "corners": quad.tolist()}
            for lab, quad in zip(labels, corners.points)
        ],
    }
    if intrinsics is not None:
        doc["intrinsics"] = {
            "fx": intrinsics.fx, "fy": intrinsics.fy,
            "ox": intrinsics.ox, "oy": intrinsics.oy,
        }
    Path(path).write_text(json.dumps(doc, indent=2))


def load_corner_file(path):
    """Returns (CornerSet, Intrinsics or None, labels). Corner order is
    validated: each quadruple must be convex in canonical orientation."""
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != CORNER_SCHEMA_VERSION:
        raise GeometryError("unsupported corner file schema version")
    quads = []
    labels = []
    for btn in doc["buttons"]:
        quad = np.asarray(btn["corners"], dtype=np.float64)
        if quad.shape != (4, 2):
            raise GeometryError("each button needs exactly 4 [x, y] corners")
        ordered = order_corners(quad)
        if not np.allclose(ordered, quad):
            raise GeometryError("button corners are not in canonical order")
        quads.append(quad)
        labels.append(int(btn.get("label", len(labels) + 1)))
    corners = CornerSet(Frame.PIXEL, np.stack(quads))
    k = None
    if "intrinsics" in doc:
        f = doc["intrinsics"]
        k = Intrinsics(fx=f["fx"], fy=f["fy"], ox=f["ox"], oy=f["oy"])
    return corners, k, labels


def save_pose_file(path, pose, extra=None):
    doc = {
        "schema_version": 1,
        "angles_deg": [pose.theta_x, pose.theta_y, pose.theta_z],
        "t": pose.t.tolist(),
    }
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=2))


def load_pose_file(path):
    doc = json.loads(Path(path).read_text())
    ax, ay, az = doc["angles_deg"]
    return PoseHypothesis(ax, ay, az, t=np.asarray(doc.get("t", [0, 0, 0]), dtype=np.float64))


def build_report(result, residual_before, residual_after, workers, coarse_to_fine):
    pose = result.best_pose
    raw = result.raw_scores_best
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "angles_deg": [pose.theta_x, pose.theta_y, pose.theta_z],
        "translation": pose.t.tolist(),
        "best_final_cr": result.best_final_cr,
        "raw_scores": {
            "kh_norm": raw.kh_norm,
            "krv": raw.krv,
            "cos_norm": raw.cos_norm,
        },
        "residual_before": residual_before,
        "residual_after": residual_after,
        "hypotheses_evaluated": result.hypotheses_evaluated,
        "elapsed_s": result.elapsed,
        "workers": workers,
        "coarse_to_fine": coarse_to_fine,
    }
