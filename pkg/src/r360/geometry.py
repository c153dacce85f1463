"""Angle conventions and conversions for 360-degree oriented rectangles.

Screen coordinates throughout: x grows rightward, y grows downward.
Angles are radians measured from the +x axis increasing toward +y, so a
positive angle tilts down-screen. A box angle carries the full
orientation in [-pi, pi): theta and theta + pi describe the same
rectangular region but opposite head directions, and no operation here
is allowed to blur that distinction silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import (
    AmbiguityError,
    DegenerateGeometryError,
    InvalidValueError,
    ShapeError,
)

Point = tuple[float, float]

RECT_TOLERANCE = 1e-6

_TWO_PI = 2.0 * math.pi
_QUARTER = math.pi / 2.0


def wrap_angle(theta: float) -> float:
    """Reduce an angle modulo 2*pi into the half-open interval [-pi, pi)."""
    if not math.isfinite(theta):
        raise InvalidValueError(f"angle must be finite, got {theta!r}")
    return (theta + math.pi) % _TWO_PI - math.pi


def angle_difference(a: float, b: float) -> float:
    """Circular distance between two angles, in [0, pi].

    The maximum, pi, is reached exactly by a box and its head-flipped
    twin (theta + pi).
    """
    return abs(wrap_angle(a - b))


@dataclass(frozen=True)
class QuadBox:
    """Rectangle as four corners A, B, C, D with head semantics.

    A is the top-left corner of the content (the left end of the head
    edge A->B) and the ring A, B, C, D runs clockwise on screen. The
    constructor only checks structure: clockwise order, convexity and
    rectangularity are enforced by the operations that need them, so
    parsers can round-trip nonconforming files for validation to report
    on instead of dying mid-read.
    """

    corners: tuple[Point, Point, Point, Point]

    def __post_init__(self) -> None:
        if len(self.corners) != 4:
            raise InvalidValueError(f"need exactly 4 corners, got {len(self.corners)}")
        coerced = tuple((float(x), float(y)) for x, y in self.corners)
        object.__setattr__(self, "corners", coerced)

    @classmethod
    def from_flat(cls, values: Sequence[float]) -> "QuadBox":
        """Build from xA yA xB yB xC yC xD yD."""
        if len(values) != 8:
            raise InvalidValueError(f"need 8 coordinates, got {len(values)}")
        it = iter(values)
        return cls(tuple(zip(it, it)))  # type: ignore[arg-type]

    @property
    def flat(self) -> tuple[float, ...]:
        return tuple(v for corner in self.corners for v in corner)


@dataclass(frozen=True)
class OrientedBox:
    """Rectangle as (cx, cy, w, h, theta) with theta wrapped to [-pi, pi).

    w is the length of the head edge A->B and theta its direction; h is
    the length of the side edge B->C.
    """

    cx: float
    cy: float
    w: float
    h: float
    theta: float

    def __post_init__(self) -> None:
        for name in ("cx", "cy", "w", "h", "theta"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidValueError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.w <= 0.0 or self.h <= 0.0:
            raise InvalidValueError(f"sides must be positive, got w={self.w}, h={self.h}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def area(self) -> float:
        return self.w * self.h


class AngleConvention(Enum):
    """The five angle conventions and their legal intervals.

    The four legacy conventions span only 180 degrees of distinct
    orientations, so they cannot tell a box from its head-flipped twin.
    Long-edge conventions additionally require w > h (w == h is
    tolerated, since a square has no long edge to prefer).
    """

    OC_OLD = ("oc_old", -_QUARTER, 0.0, True, False, False)
    OC_NEW = ("oc_new", 0.0, _QUARTER, False, True, False)
    LE90 = ("le90", -_QUARTER, _QUARTER, True, False, True)
    LE135 = ("le135", -math.pi / 4.0, 3.0 * math.pi / 4.0, True, False, True)
    R360 = ("r360", -math.pi, math.pi, True, False, False)

    def __init__(self, tag, lo, hi, lo_closed, hi_closed, long_edge):
        self.tag = tag
        self.lo = lo
        self.hi = hi
        self.lo_closed = lo_closed
        self.hi_closed = hi_closed
        self.long_edge = long_edge

    def contains(self, theta: float) -> bool:
        above = theta >= self.lo if self.lo_closed else theta > self.lo
        below = theta <= self.hi if self.hi_closed else theta < self.hi
        return above and below

    def is_legal(self, box: OrientedBox) -> bool:
        if self.long_edge and box.w < box.h:
            return False
        return self.contains(box.theta)


def signed_area(quad: QuadBox) -> float:
    """Shoelace area of the corner ring; positive means clockwise on screen."""
    pts = quad.corners
    total = 0.0
    for i in range(4):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % 4]
        total += x0 * y1 - x1 * y0
    return total / 2.0


def rbox_to_qbox(box: OrientedBox) -> QuadBox:
    """Corner form of an oriented box.

    A->B has length w and direction theta, B->C has length h and turns a
    quarter turn down-screen, which makes the ring clockwise. Inverts
    qbox_to_rbox exactly up to floating point for any valid box.
    """
    sin = math.sin(box.theta)
    cos = math.cos(box.theta)
    hw = box.w / 2.0
    hh = box.h / 2.0
    return QuadBox(
        (
            (box.cx + hh * sin - hw * cos, box.cy - hh * cos - hw * sin),
            (box.cx + hh * sin + hw * cos, box.cy - hh * cos + hw * sin),
            (box.cx - hh * sin + hw * cos, box.cy + hh * cos + hw * sin),
            (box.cx - hh * sin - hw * cos, box.cy + hh * cos - hw * sin),
        )
    )


def qbox_to_rbox(quad: QuadBox, rel_tol: float = RECT_TOLERANCE) -> OrientedBox:
    """Center-size-angle form of a rectangular quad.

    Requires an actual clockwise rectangle within rel_tol (relative, on
    opposite edge lengths and adjacent-edge perpendicularity). Noisier
    corner sets should go through min_area_rect instead; there is
    deliberately no silent fallback here, because reshaping a malformed
    annotation would hide the upstream bug.
    """
    for x, y in quad.corners:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidValueError("corners must be finite")
    a, b, c, d = quad.corners
    ab = math.dist(a, b)
    bc = math.dist(b, c)
    cd = math.dist(c, d)
    da = math.dist(d, a)
    if min(ab, bc, cd, da) <= 0.0:
        raise DegenerateGeometryError("zero-length edge")
    if abs(ab - cd) > rel_tol * max(ab, cd) or abs(bc - da) > rel_tol * max(bc, da):
        raise ShapeError(f"opposite edges differ beyond tolerance: {ab:g}/{cd:g}, {bc:g}/{da:g}")
    dot = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1])
    if abs(dot) > rel_tol * ab * bc:
        raise ShapeError(f"adjacent edges not perpendicular within tolerance (dot={dot:g})")
    if signed_area(quad) <= 0.0:
        raise ShapeError("counterclockwise corners; a mirrored rectangle is not representable")
    cx = (a[0] + b[0] + c[0] + d[0]) / 4.0
    cy = (a[1] + b[1] + c[1] + d[1]) / 4.0
    theta = math.atan2(b[1] - a[1], b[0] - a[0])
    return OrientedBox(cx, cy, ab, bc, wrap_angle(theta))


def cyclic_shift(quad: QuadBox, k: int) -> QuadBox:
    """Relabel corner A to the corner k steps ahead, keeping the cyclic order."""
    k %= 4
    c = quad.corners
    return QuadBox((c[k], c[(k + 1) % 4], c[(k + 2) % 4], c[(k + 3) % 4]))


def _convex_hull(points: list[Point]) -> list[Point]:
    # Monotone chain; strict turns only, so collinear points drop out.
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[Point] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[Point] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def min_area_rect(points: Sequence[Point], head_hint: Point) -> OrientedBox:
    """Minimum-area enclosing rectangle with the head corner chosen by hint.

    Rotating calipers over the convex hull: a minimal enclosing
    rectangle is aligned with some hull edge, so every hull edge
    direction is tried. Corner A of the implied quad is the rectangle
    corner nearest head_hint and the ring is clockwise. Among rectangles
    tied on area (within 1e-12 relative) the one whose resulting theta
    has the smallest absolute value wins, then the smaller theta.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if len(pts) < 3:
        raise DegenerateGeometryError(f"need at least 3 points, got {len(pts)}")
    for x, y in pts:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidValueError("points must be finite")
    hx, hy = float(head_hint[0]), float(head_hint[1])
    hull = _convex_hull(pts)
    if len(hull) < 3:
        raise DegenerateGeometryError("points are collinear")

    candidates = []
    n = len(hull)
    for i in range(n):
        px, py = hull[i]
        qx, qy = hull[(i + 1) % n]
        ang = math.atan2(qy - py, qx - px)
        cosv = math.cos(ang)
        sinv = math.sin(ang)
        xs = [x * cosv + y * sinv for x, y in hull]
        ys = [-x * sinv + y * cosv for x, y in hull]
        x0, x1 = min(xs), max(xs)
        y0, y1 = min(ys), max(ys)
        area = (x1 - x0) * (y1 - y0)
        local = ((x0, y0), (x1, y0), (x1, y1), (x0, y1))  # clockwise on screen
        world = tuple(
            (lx * cosv - ly * sinv, lx * sinv + ly * cosv) for lx, ly in local
        )
        candidates.append((area, world))

    best_area = min(area for area, _ in candidates)
    tol = 1e-12 * max(1.0, best_area)
    best_box = None
    best_key = None
    for area, world in candidates:
        if area - best_area > tol:
            continue
        start = min(
            range(4),
            key=lambda j: (
                (world[j][0] - hx) ** 2 + (world[j][1] - hy) ** 2,
                world[j][1],
                world[j][0],
            ),
        )
        quad = QuadBox(
            (world[start], world[(start + 1) % 4], world[(start + 2) % 4], world[(start + 3) % 4])
        )
        box = qbox_to_rbox(quad)
        key = (abs(box.theta), box.theta)
        if best_key is None or key < best_key:
            best_key = key
            best_box = box
    assert best_box is not None
    return best_box


def convert_convention(box: OrientedBox, src: AngleConvention, dst: AngleConvention) -> OrientedBox:
    """Re-express a box under another angle convention.

    Every legacy target is reached by folding theta in half- or
    quarter-turn steps, swapping w and h on odd quarter turns. The fold
    discards which end of the box is the head, which is exactly why the
    reverse direction, legacy into R360, is refused as ambiguous rather
    than guessed.
    """
    if not src.is_legal(box):
        raise InvalidValueError(
            f"box not legal under {src.tag}: w={box.w:g}, h={box.h:g}, theta={box.theta:g}"
        )
    if dst is AngleConvention.R360:
        if src is AngleConvention.R360:
            return box
        raise AmbiguityError(
            f"cannot lift {src.tag} to r360: the 180-degree fold lost the head direction"
        )
    w, h, th = box.w, box.h, box.theta
    if dst.long_edge:
        if w < h:
            w, h = h, w
            th += _QUARTER
        th = dst.lo + (th - dst.lo) % math.pi
    else:
        if dst.hi_closed:
            folded = dst.hi - (dst.hi - th) % _QUARTER
        else:
            folded = dst.lo + (th - dst.lo) % _QUARTER
        if round((folded - th) / _QUARTER) % 2:
            w, h = h, w
        th = folded
    return OrientedBox(box.cx, box.cy, w, h, th)
