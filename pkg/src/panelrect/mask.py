"""Label mask to ordered button corners.

Pipeline per mask: morphological closing, per-class connected components,
boundary extraction, Hough line voting, four-edge selection, pairwise
intersection, canonical corner ordering (1 top-left, 2 top-right,
3 bottom-right, 4 bottom-left).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from . import kernels
from .geometry import CornerSet, Frame


class MaskPipelineError(ValueError):
    pass


class EmptyPanelError(MaskPipelineError):
    pass


_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class LabelMask:
    """2-D grid of small-integer class labels; 0 is background."""

    labels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.labels)
        if arr.ndim != 2:
            raise MaskPipelineError("labels must be a 2-D grid")
        if arr.size == 0:
            raise MaskPipelineError("mask must be non-empty")
        if np.issubdtype(arr.dtype, np.floating):
            raise MaskPipelineError("labels must be integers")
        if arr.min() < 0:
            raise MaskPipelineError("labels must be non-negative")
        arr = np.ascontiguousarray(arr.astype(np.int32))
        arr.setflags(write=False)
        object.__setattr__(self, "labels", arr)

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    @property
    def class_ids(self):
        ids = np.unique(self.labels)
        return [int(c) for c in ids if c != 0]


@dataclass(frozen=True)
class HoughLine:
    """x*cos(theta) + y*sin(theta) = rho, theta in [0, pi)."""

    rho: float
    theta: float
    votes: int

    def distance(self, x, y):
        return abs(x * math.cos(self.theta) + y * math.sin(self.theta) - self.rho)


@dataclass(frozen=True)
class DetectParams:
    close_radius: int = 2
    closing_order: str = "close"  # "close" = dilate-then-erode; "open" for the reverse
    min_area: int = 100
    rho_step: float = 1.0
    theta_step: float = math.radians(1.0)
    peak_ratio: float = 0.5
    nms_rho: float = 3.0
    nms_theta: float = math.radians(5.0)
    min_edge_separation: float = 5.0
    refine_lines: bool = True
    edge_offset: float = 0.5  # compensates the inward bias of boundary pixel centers


def close_mask(mask, radius=2, order="close"):
    """Per-class morphological closing with a square structuring element."""
    if radius < 1:
        raise MaskPipelineError("closing radius must be >= 1")
    if order not in ("close", "open"):
        raise MaskPipelineError("order must be 'close' or 'open'")
    se = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    out = np.zeros_like(mask.labels)
    for cid in mask.class_ids:
        binary = mask.labels == cid
        if order == "close":
            binary = ndimage.binary_erosion(ndimage.binary_dilation(binary, se), se)
        else:
            binary = ndimage.binary_dilation(ndimage.binary_erosion(binary, se), se)
        out[binary] = cid
    return LabelMask(out)


@dataclass(frozen=True)
class ButtonRegion:
    class_id: int
    pixels: np.ndarray  # boolean mask, full image size
    bbox: tuple  # (x0, y0, x1, y1) inclusive

    @property
    def center(self):
        x0, y0, x1, y1 = self.bbox
        return (0.5 * (x0 + x1), 0.5 * (y0 + y1))


def extract_button_regions(mask, min_area=100):
    """8-connected components per class, in reading order."""
    regions = []
    for cid in mask.class_ids:
        labeled, n = ndimage.label(mask.labels == cid, structure=_EIGHT)
        for i in range(1, n + 1):
            component = labeled == i
            if int(component.sum()) < min_area:
                continue
            ys, xs = np.nonzero(component)
            bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
            regions.append(ButtonRegion(cid, component, bbox))
    if not regions:
        raise EmptyPanelError("no button regions above the area floor")
    regions.sort(key=lambda r: (r.bbox[1], r.bbox[0]))
    return regions


def boundary_pixels(region_mask):
    """Region pixels with at least one 8-neighbor outside the region."""
    interior = ndimage.binary_erosion(region_mask, _EIGHT)
    ys, xs = np.nonzero(region_mask & ~interior)
    return xs.astype(np.float64), ys.astype(np.float64)


def hough_lines(xs, ys, rho_step=1.0, theta_step=math.radians(1.0),
                peak_ratio=0.5, nms_rho=3.0, nms_theta=math.radians(5.0)):
    """Accumulator-based line detection over boundary pixels.

    Peaks above ``peak_ratio`` of the maximum vote survive greedy
    non-maximum suppression within (+-nms_rho, +-nms_theta); the
    suppression treats (theta + pi, -rho) as the same line family.
    """
    if len(xs) == 0:
        raise MaskPipelineError("no boundary pixels")
    thetas = np.arange(0.0, math.pi - 1e-12, theta_step)
    cos_t = np.cos(thetas)
    sin_t = np.sin(thetas)
    rho_max = float(np.hypot(np.max(np.abs(xs)), np.max(np.abs(ys)))) + 1.0
    nrho = int(np.ceil(2 * rho_max / rho_step)) + 1
    rho_min = -rho_max
    acc = np.zeros((nrho, len(thetas)), dtype=np.int64)
    kernels.hough_accumulate(
        np.ascontiguousarray(xs), np.ascontiguousarray(ys),
        cos_t, sin_t, rho_min, rho_step, acc,
    )
    vmax = int(acc.max())
    if vmax == 0:
        raise MaskPipelineError("empty accumulator")
    ri, ti = np.nonzero(acc >= peak_ratio * vmax)
    votes = acc[ri, ti]
    order = np.lexsort((ti, ri, -votes))
    lines = []
    for j in order:
        rho = rho_min + ri[j] * rho_step
        theta = thetas[ti[j]]
        if any(_same_line(rho, theta, ln.rho, ln.theta, nms_rho, nms_theta) for ln in lines):
            continue
        lines.append(HoughLine(rho=float(rho), theta=float(theta), votes=int(votes[j])))
    return lines


def _same_line(rho1, theta1, rho2, theta2, nms_rho, nms_theta):
    if abs(theta1 - theta2) <= nms_theta and abs(rho1 - rho2) <= nms_rho:
        return True
    # wrapped pairing: (theta, rho) ~ (theta +- pi, -rho)
    dt = math.pi - abs(theta1 - theta2)
    return dt <= nms_theta and abs(rho1 + rho2) <= nms_rho


def _angle_dist(a, b):
    """Circular distance between line normals, period pi."""
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


def select_four_edges(lines, center, min_separation=5.0):
    """Split candidates into two roughly perpendicular families and keep
    the two strongest, sufficiently separated lines of each.

    The split is seeded by the strongest line rather than a fixed
    45-degree cut, so quads rotated near 45 degrees in-plane still
    partition 2+2. Returns (top, bottom, left, right).
    """
    if len(lines) < 4:
        raise MaskPipelineError(f"need at least 4 candidate lines, got {len(lines)}")
    seed = max(lines, key=lambda ln: ln.votes)
    fam_a, fam_b = [], []
    for ln in lines:
        (fam_a if _angle_dist(ln.theta, seed.theta) < math.pi / 4 else fam_b).append(ln)
    # the family whose normals point more vertically holds the horizontal edges
    if fam_b and _mean_dist_to_horizontal(fam_a) <= _mean_dist_to_horizontal(fam_b):
        horiz, vert = fam_a, fam_b
    else:
        horiz, vert = fam_b, fam_a
    cx, cy = center

    def pick_two(cands, offset):
        cands = sorted(cands, key=lambda ln: -ln.votes)
        if not cands:
            return None
        first = cands[0]
        for second in cands[1:]:
            if abs(offset(second) - offset(first)) >= min_separation:
                return first, second
        return None

    hpair = pick_two(horiz, lambda ln: _y_at(ln, cx))
    vpair = pick_two(vert, lambda ln: _x_at(ln, cy))
    if hpair is None or vpair is None:
        raise MaskPipelineError("cannot assemble a 2+2 edge partition")
    top, bottom = sorted(hpair, key=lambda ln: _y_at(ln, cx))
    left, right = sorted(vpair, key=lambda ln: _x_at(ln, cy))
    return top, bottom, left, right


def _mean_dist_to_horizontal(fam):
    # horizontal edges have normals near theta = pi/2
    return sum(_angle_dist(ln.theta, math.pi / 2) for ln in fam) / len(fam)


def _y_at(line, x):
    s = math.sin(line.theta)
    if abs(s) < 1e-9:
        return math.inf
    return (line.rho - x * math.cos(line.theta)) / s


def _x_at(line, y):
    c = math.cos(line.theta)
    if abs(c) < 1e-9:
        return math.inf
    return (line.rho - y * math.sin(line.theta)) / c


def intersect(l1, l2):
    """Intersection point of two accumulator lines."""
    if abs(math.sin(l1.theta - l2.theta)) <= 1e-6:
        raise MaskPipelineError("near-parallel lines do not intersect")
    a = np.array(
        [
            [math.cos(l1.theta), math.sin(l1.theta)],
            [math.cos(l2.theta), math.sin(l2.theta)],
        ]
    )
    b = np.array([l1.rho, l2.rho])
    x, y = np.linalg.solve(a, b)
    return float(x), float(y)


def validate_quad(pts):
    """Distinct corners, convex, canonical orientation (consecutive edge
    cross products all positive in x-right / y-down coordinates)."""
    pts = np.asarray(pts, dtype=np.float64)
    if pts.shape != (4, 2):
        raise MaskPipelineError("exactly four points required")
    for i in range(4):
        for j in range(i + 1, 4):
            if np.linalg.norm(pts[i] - pts[j]) < 1e-9:
                raise MaskPipelineError("duplicate corner points")
    for i in range(4):
        e1 = pts[(i + 1) % 4] - pts[i]
        e2 = pts[(i + 2) % 4] - pts[(i + 1) % 4]
        if e1[0] * e2[1] - e1[1] * e2[0] <= 0:
            raise MaskPipelineError("points do not form a convex quadrilateral")
    return pts


def order_corners(points):
    """Canonical quadruple: angular sort about the centroid, starting from
    the corner with the smallest x + y (top-left in image coordinates)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.shape != (4, 2):
        raise MaskPipelineError("exactly four points required")
    for i in range(4):
        for j in range(i + 1, 4):
            if np.linalg.norm(pts[i] - pts[j]) < 1e-9:
                raise MaskPipelineError("duplicate corner points")
    c = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0])
    pts = pts[np.argsort(ang)]
    start = int(np.argmin(pts.sum(axis=1)))
    return validate_quad(np.roll(pts, -start, axis=0))


def refine_line(line, xs, ys, tol=1.5, exclude=None, exclude_radius=4.0):
    """Total-least-squares refit of a line to its nearby boundary pixels.

    ``exclude`` points (typically the provisional corners of the edge)
    are masked out with their neighborhoods so that pixels belonging to
    the adjacent perpendicular edges do not skew the fit.
    """
    d = np.abs(xs * math.cos(line.theta) + ys * math.sin(line.theta) - line.rho)
    sel = d <= tol
    if exclude is not None:
        for px, py in exclude:
            sel &= (xs - px) ** 2 + (ys - py) ** 2 > exclude_radius**2
    if int(sel.sum()) < 2:
        return line
    x = xs[sel]
    y = ys[sel]
    mx, my = x.mean(), y.mean()
    cov = np.cov(np.stack([x - mx, y - my]))
    w, v = np.linalg.eigh(cov)
    normal = v[:, 0]  # eigenvector of the smaller eigenvalue
    theta = math.atan2(normal[1], normal[0]) % math.pi
    rho = mx * math.cos(theta) + my * math.sin(theta)
    return HoughLine(rho=float(rho), theta=float(theta), votes=line.votes)


@dataclass(frozen=True)
class ButtonDetection:
    class_id: int
    bbox: tuple
    corners: np.ndarray | None
    error: str | None = None

    @property
    def ok(self):
        return self.corners is not None


@dataclass(frozen=True)
class DetectionResult:
    buttons: list

    @property
    def succeeded(self):
        return [b for b in self.buttons if b.ok]

    @property
    def failed(self):
        return [b for b in self.buttons if not b.ok]

    def corner_set(self):
        good = self.succeeded
        if not good:
            raise EmptyPanelError("no button yielded a corner quadruple")
        return CornerSet(Frame.PIXEL, np.stack([b.corners for b in good]))


def _quad_from_edges(edges):
    top, bottom, left, right = edges
    return [
        intersect(top, left),
        intersect(top, right),
        intersect(bottom, right),
        intersect(bottom, left),
    ]


def _push_outward(line, center, offset):
    """Shift a fitted edge along its normal, away from the region center.

    Boundary pixel centers sit about half a pixel inside the true region
    outline, so fitted edges are biased inward by that much.
    """
    cx, cy = center
    side = line.rho - (cx * math.cos(line.theta) + cy * math.sin(line.theta))
    return HoughLine(
        rho=line.rho + math.copysign(offset, side),
        theta=line.theta,
        votes=line.votes,
    )


def detect_button(region, params):
    xs, ys = boundary_pixels(region.pixels)
    lines = hough_lines(
        xs, ys,
        rho_step=params.rho_step, theta_step=params.theta_step,
        peak_ratio=params.peak_ratio, nms_rho=params.nms_rho,
        nms_theta=params.nms_theta,
    )
    if len(lines) < 4:
        raise MaskPipelineError(f"only {len(lines)} line peaks survived")
    edges = select_four_edges(lines, region.center, params.min_edge_separation)
    if params.refine_lines:
        edges = tuple(refine_line(ln, xs, ys) for ln in edges)
        quad = _quad_from_edges(edges)
        # second pass excluding corner neighborhoods
        ends = [(0, 1), (2, 3), (0, 3), (1, 2)]  # top, bottom, left, right
        edges = tuple(
            refine_line(ln, xs, ys, exclude=[quad[a], quad[b]])
            for ln, (a, b) in zip(edges, ends)
        )
    if params.edge_offset:
        edges = tuple(_push_outward(ln, region.center, params.edge_offset) for ln in edges)
    # edge labels already identify the corners: 1 = top/left intersection,
    # then clockwise; this survives in-plane rotations that would confuse
    # a smallest-x+y start rule
    return validate_quad(_quad_from_edges(edges))


def detect_corners(mask, params=None):
    """Full mask-to-corners pipeline; per-button failures are recorded,
    the panel fails only when no button succeeds."""
    params = params or DetectParams()
    closed = close_mask(mask, params.close_radius, params.closing_order)
    regions = extract_button_regions(closed, params.min_area)
    buttons = []
    for region in regions:
        try:
            corners = detect_button(region, params)
            buttons.append(ButtonDetection(region.class_id, region.bbox, corners))
        except MaskPipelineError as exc:
            buttons.append(ButtonDetection(region.class_id, region.bbox, None, str(exc)))
    result = DetectionResult(buttons)
    if not result.succeeded:
        raise EmptyPanelError("corner detection failed for every button")
    return result
