"""Convex polygon clipping and rotated-box overlap."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractViolationError, InvalidValueError
from .geometry import OrientedBox, Point, rbox_to_qbox

# Points within this distance (px) of a clip edge count as inside. The
# slivers this admits have areas orders of magnitude below any overlap
# tolerance used downstream.
CLIP_EPS = 1e-9


def _ring_area(verts) -> float:
    # signed shoelace / 2; positive is clockwise on screen (y down)
    total = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return total / 2.0


@dataclass(frozen=True)
class ConvexPolygon:
    """Convex vertex ring, either winding."""

    vertices: tuple[Point, ...]

    def __post_init__(self) -> None:
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidValueError(f"need at least 3 vertices, got {len(verts)}")
        for x, y in verts:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise InvalidValueError("vertices must be finite")
        n = len(verts)
        for i in range(n):
            if math.dist(verts[i], verts[(i + 1) % n]) < CLIP_EPS:
                raise ContractViolationError("repeated consecutive vertices")
        pos = neg = False
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cx, cy = verts[(i + 2) % n]
            cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
            scale = math.dist((ax, ay), (bx, by)) * math.dist((bx, by), (cx, cy))
            if cross > CLIP_EPS * scale:
                pos = True
            elif cross < -CLIP_EPS * scale:
                neg = True
        if pos and neg:
            raise ContractViolationError("polygon is not convex")

    @property
    def area(self) -> float:
        return abs(_ring_area(self.vertices))


def polygon_area(poly: ConvexPolygon | None) -> float:
    """Unsigned area; the empty intersection (None) counts as zero."""
    if poly is None:
        return 0.0
    return poly.area


def _clockwise(verts: tuple[Point, ...]) -> tuple[Point, ...]:
    return verts if _ring_area(verts) >= 0.0 else tuple(reversed(verts))


def _clip_halfplane(verts: list[Point], a: Point, b: Point) -> list[Point]:
    # keep the side left of a->b for a clockwise ring (positive cross)
    ex = b[0] - a[0]
    ey = b[1] - a[1]
    bound = -CLIP_EPS * math.hypot(ex, ey)

    def side(p: Point) -> float:
        return ex * (p[1] - a[1]) - ey * (p[0] - a[0])

    out: list[Point] = []
    s = verts[-1]
    side_s = side(s)
    for e in verts:
        side_e = side(e)
        e_in = side_e >= bound
        s_in = side_s >= bound
        if e_in != s_in:
            denom = side_s - side_e
            if denom != 0.0:
                t = side_s / denom
                out.append((s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1])))
        if e_in:
            out.append(e)
        s, side_s = e, side_e
    return out


def _tidy_ring(verts: list[Point]) -> list[Point]:
    # drop near-duplicate neighbours, then near-collinear middles
    out: list[Point] = []
    for p in verts:
        if out and math.dist(out[-1], p) < CLIP_EPS:
            continue
        out.append(p)
    while len(out) > 1 and math.dist(out[0], out[-1]) < CLIP_EPS:
        out.pop()
    changed = True
    while changed and len(out) > 3:
        changed = False
        for i in range(len(out)):
            a = out[i - 1]
            b = out[i]
            c = out[(i + 1) % len(out)]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            scale = math.dist(a, b) * math.dist(b, c)
            if abs(cross) <= 2.0 * CLIP_EPS * scale:
                out.pop(i)
                changed = True
                break
    return out


def clip_convex(subject: ConvexPolygon, clipper: ConvexPolygon) -> ConvexPolygon | None:
    """Intersection of two convex polygons, or None when it encloses no area.

    Sequential half-plane clipping of the subject against each clipper
    edge. Touch-only contact (a shared corner or edge) comes back as
    None, since the intersection region is empty of area.
    """
    out = list(_clockwise(subject.vertices))
    ring = _clockwise(clipper.vertices)
    n = len(ring)
    for i in range(n):
        if not out:
            return None
        out = _clip_halfplane(out, ring[i], ring[(i + 1) % n])
    out = _tidy_ring(out)
    if len(out) < 3 or abs(_ring_area(out)) == 0.0:
        return None
    return ConvexPolygon(tuple(out))


def rotated_iou(a: OrientedBox, b: OrientedBox) -> float:
    """Intersection over union of two oriented boxes, in [0, 1].

    Head direction does not matter: theta and theta + pi cover the same
    region. The pair is clipped in a canonical argument order so the
    result is bit-identical under argument swap.
    """
    k1, k2 = sorted((a, b), key=lambda x: (x.cx, x.cy, x.w, x.h, x.theta))
    inter = clip_convex(
        ConvexPolygon(rbox_to_qbox(k1).corners),
        ConvexPolygon(rbox_to_qbox(k2).corners),
    )
    overlap = polygon_area(inter)
    if overlap <= 0.0:
        return 0.0
    union = k1.w * k1.h + k2.w * k2.h - overlap
    return min(max(overlap / union, 0.0), 1.0)
