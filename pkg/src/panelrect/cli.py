"""Command-line front end: detect-corners, rectify, evaluate, synth."""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import files, synth
from .geometry import (
    DEFAULT_INTRINSICS,
    GeometryError,
    Intrinsics,
    PoseHypothesis,
    apply_pose,
    back_project,
    pixel_coordinates,
    project,
    to_homogeneous,
)
from .mask import DetectParams, EmptyPanelError, MaskPipelineError, detect_corners
from .search import SearchConfig, search_pose, search_pose_coarse_to_fine
from .warp import overlay_corners, warp_image


def _parse_intrinsics(text):
    try:
        fx, fy, ox, oy = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected fx,fy,ox,oy")
    return Intrinsics(fx=fx, fy=fy, ox=ox, oy=oy)


def _parse_pose(text):
    try:
        ax, ay, az = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected theta_x,theta_y,theta_z in degrees")
    return PoseHypothesis(ax, ay, az)


def _parse_grid(text):
    try:
        rows, cols = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected ROWSxCOLS, e.g. 3x2")
    return rows, cols


def _add_search_flags(p):
    p.add_argument("--intrinsics", type=_parse_intrinsics, default=None,
                   help="fx,fy,ox,oy (default: 320,320,320,240)")
    p.add_argument("--alpha", type=float, default=-40.0, help="grid low, degrees")
    p.add_argument("--beta", type=float, default=40.0, help="grid high, degrees")
    p.add_argument("--gamma", type=float, default=0.5, help="grid step, degrees")
    p.add_argument("--coarse-to-fine", action="store_true",
                   help="coarse sweep then local refinement instead of the full lattice")
    p.add_argument("--workers", type=int, default=None, help="sweep worker threads")
    p.add_argument("--dump-scores", default=None, metavar="PATH",
                   help="write one raw criterion triple per hypothesis (large)")


def cmd_detect_corners(args):
    mask = files.load_mask(args.mask)
    params = DetectParams(close_radius=args.close_radius, min_area=args.min_area)
    try:
        result = detect_corners(mask, params)
    except (EmptyPanelError, MaskPipelineError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    corners = result.corner_set()
    labels = [b.class_id for b in result.succeeded]
    files.save_corner_file(args.output, corners, intrinsics=args.intrinsics, labels=labels)
    if args.overlay:
        img = np.full((mask.height, mask.width), 0, dtype=np.uint8)
        img[mask.labels > 0] = 180
        files.save_image(args.overlay, overlay_corners(img, corners))
    for b in result.failed:
        print(f"button class {b.class_id} at {b.bbox} failed: {b.error}", file=sys.stderr)
    print(f"detected {len(result.succeeded)}/{len(result.buttons)} buttons -> {args.output}")
    return 2 if result.failed else 0


def _resolve_intrinsics(flag_value, file_value):
    # precedence: command-line flag, then corners-file field, then default
    if flag_value is not None:
        return flag_value
    if file_value is not None:
        return file_value
    return DEFAULT_INTRINSICS


def cmd_rectify(args):
    image = files.load_image(args.image)
    file_k = None
    if args.corners:
        detected, file_k, _ = files.load_corner_file(args.corners)
    else:
        mask = files.load_mask(args.mask)
        detected = detect_corners(mask).corner_set()
    k = _resolve_intrinsics(args.intrinsics, file_k)

    if args.reference:
        reference, _, _ = files.load_corner_file(args.reference)
    else:
        rows, cols = args.reference_grid if args.reference_grid else (detected.button_count, 1)
        spec = synth.PanelSpec.grid(
            rows, cols, image_width=image.shape[1], image_height=image.shape[0]
        )
        reference = spec.corner_grid()

    cfg = SearchConfig(
        alpha=args.alpha, beta=args.beta, gamma=args.gamma,
        coarse_to_fine=args.coarse_to_fine,
        worker_count=args.workers or (os.cpu_count() or 1),
    )
    run = search_pose_coarse_to_fine if args.coarse_to_fine else search_pose
    result = run(detected, reference, k, cfg, dump_path=args.dump_scores)

    rectified = warp_image(image, result.best_pose, k, interpolation=args.interpolation)
    files.save_image(args.output, rectified)

    residual_before = synth.evaluate(detected, k)
    rect_corners = pixel_coordinates(
        project(apply_pose(back_project(to_homogeneous(detected), k), result.best_pose), k)
    )
    residual_after = synth.evaluate(rect_corners, k)
    report = files.build_report(
        result, residual_before, residual_after, cfg.worker_count, args.coarse_to_fine
    )
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2))
    if args.overlay:
        files.save_image(args.overlay, overlay_corners(rectified, rect_corners))
    pose = result.best_pose
    print(
        f"angles ({pose.theta_x:g}, {pose.theta_y:g}, {pose.theta_z:g}) deg, "
        f"final CR {result.best_final_cr:.6g}, "
        f"residual {residual_before:.6g} -> {residual_after:.6g}, "
        f"{result.hypotheses_evaluated} hypotheses in {result.elapsed:.2f}s"
    )
    return 0


def cmd_evaluate(args):
    scores = []
    for path in args.corners:
        corners, file_k, _ = files.load_corner_file(path)
        k = _resolve_intrinsics(args.intrinsics, file_k)
        value = synth.evaluate(corners, k)
        scores.append(value)
        print(f"{path}\t{value:.6f}")
    if len(scores) > 1:
        print(f"average\t{float(np.mean(scores)):.6f}")
    return 0


def cmd_synth(args):
    if args.grid:
        rows, cols = args.grid
        spec = synth.PanelSpec.grid(rows, cols, button_width=args.button_size,
                                    button_height=args.button_size, spacing=args.spacing)
    else:
        spec = synth.PanelSpec.vertical_pair(button_width=args.button_size,
                                             button_height=args.button_size,
                                             spacing=args.spacing)
    k = args.intrinsics or DEFAULT_INTRINSICS
    ref_corners, ref_mask, ref_raster = synth.generate_reference(spec)
    pose = args.pose or PoseHypothesis(0.0, 0.0, 0.0)
    corners, raster, mask = synth.distort(ref_corners, ref_raster, ref_mask, pose, k)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files.save_image(out / "image.png", raster)
    files.save_mask(out / "mask.png", mask)
    files.save_corner_file(out / "corners.json", corners, intrinsics=k)
    files.save_pose_file(
        out / "pose.json", pose,
        extra={"panel": {"rows": spec.rows, "cols": spec.cols,
                         "button_width": spec.button_width,
                         "button_height": spec.button_height,
                         "spacing": spec.spacing}},
    )
    print(f"wrote bundle to {out} ({corners.button_count} buttons)")
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="panelrect",
        description="Remove perspective distortion from rectangular-button panel images.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect-corners", help="mask -> ordered button corners")
    d.add_argument("mask", help="8-bit label mask PNG (pixel value = class id)")
    d.add_argument("-o", "--output", required=True, help="corners JSON output")
    d.add_argument("--overlay", default=None, help="diagnostic overlay PNG")
    d.add_argument("--intrinsics", type=_parse_intrinsics, default=None)
    d.add_argument("--close-radius", type=int, default=2)
    d.add_argument("--min-area", type=int, default=100)
    d.set_defaults(func=cmd_detect_corners)

    r = sub.add_parser("rectify", help="estimate pose and rectify an image")
    r.add_argument("image", help="distorted image PNG")
    src = r.add_mutually_exclusive_group(required=True)
    src.add_argument("--corners", default=None, help="detected corners JSON")
    src.add_argument("--mask", default=None, help="label mask PNG to run detection on")
    r.add_argument("--reference", default=None, help="reference corners JSON")
    r.add_argument("--reference-grid", type=_parse_grid, default=None,
                   help="generate a ROWSxCOLS reference panel")
    r.add_argument("-o", "--output", required=True, help="rectified PNG output")
    r.add_argument("--report", default=None, help="JSON report output")
    r.add_argument("--overlay", default=None, help="rectified corners overlay PNG")
    r.add_argument("--interpolation", choices=("bilinear", "nearest"), default="bilinear")
    _add_search_flags(r)
    r.set_defaults(func=cmd_rectify)

    e = sub.add_parser("evaluate", help="edge-angle cosine score of corner files")
    e.add_argument("corners", nargs="+", help="corners JSON file(s)")
    e.add_argument("--intrinsics", type=_parse_intrinsics, default=None)
    e.set_defaults(func=cmd_evaluate)

    s = sub.add_parser("synth", help="write a synthetic fixture bundle")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--pose", type=_parse_pose, default=None,
                   help="distortion angles theta_x,theta_y,theta_z in degrees")
    s.add_argument("--grid", type=_parse_grid, default=None, help="ROWSxCOLS layout")
    s.add_argument("--button-size", type=int, default=80)
    s.add_argument("--spacing", type=int, default=40)
    s.add_argument("--intrinsics", type=_parse_intrinsics, default=None)
    s.set_defaults(func=cmd_synth)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GeometryError, MaskPipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
