"""Perspective rectification of rectangular-button panel images.

Corner detection from label masks via Hough transform, camera-rotation
recovery by exhaustive grid search over three geometric criteria, and
homography-based inverse warping to a fronto-parallel view.
"""

from .criteria import (
    CriterionScores,
    cosine_norm,
    final_cr,
    horizontal_slope_norm,
    min_max_normalize,
    vertical_slope_reciprocal,
)
from .geometry import (
    CornerSet,
    DEFAULT_INTRINSICS,
    Frame,
    Intrinsics,
    PoseHypothesis,
    apply_pose,
    back_project,
    compose_rotation,
    deg_to_rad,
    pose_to_homography,
    project,
    to_homogeneous,
    translation_align_first_corner,
)
from .mask import DetectParams, HoughLine, LabelMask, detect_corners
from .search import SearchConfig, SearchResult, search_pose, search_pose_coarse_to_fine
from .synth import (
    PanelSpec,
    distort,
    distort_corners,
    evaluate,
    generate_reference,
    texture_pattern,
)
from .warp import overlay_corners, warp_image

__version__ = "0.1.0"

__all__ = [
    "CornerSet",
    "CriterionScores",
    "DEFAULT_INTRINSICS",
    "DetectParams",
    "Frame",
    "HoughLine",
    "Intrinsics",
    "LabelMask",
    "PanelSpec",
    "PoseHypothesis",
    "SearchConfig",
    "SearchResult",
    "apply_pose",
    "back_project",
    "compose_rotation",
    "cosine_norm",
    "deg_to_rad",
    "detect_corners",
    "distort",
    "distort_corners",
    "evaluate",
    "final_cr",
    "generate_reference",
    "horizontal_slope_norm",
    "min_max_normalize",
    "overlay_corners",
    "pose_to_homography",
    "project",
    "search_pose",
    "search_pose_coarse_to_fine",
    "texture_pattern",
    "to_homogeneous",
    "translation_align_first_corner",
    "vertical_slope_reciprocal",
    "warp_image",
]
