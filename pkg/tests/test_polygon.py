"""Convex clipping and the exact rotated IoU kernel."""
import math
import random

import pytest

from r360 import (
    ContractViolationError,
    ConvexPolygon,
    InvalidValueError,
    OrientedBox,
    clip_convex,
    polygon_area,
    rotated_iou,
)

from conftest import mc_iou, rand_obox


def test_polygon_validation():
    with pytest.raises(InvalidValueError):
        ConvexPolygon(((0, 0), (1, 1)))
    with pytest.raises(InvalidValueError):
        ConvexPolygon(((0, 0), (float("nan"), 0), (1, 1)))
    with pytest.raises(ContractViolationError):
        ConvexPolygon(((0, 0), (0, 0), (1, 1), (0, 1)))
    with pytest.raises(ContractViolationError):
        ConvexPolygon(((0, 0), (2, 0), (0.5, 0.5), (0, 2)))  # reflex corner


def test_polygon_area_unsigned():
    assert ConvexPolygon(((0, 0), (2, 0), (2, 1), (0, 1))).area == 2.0
    assert ConvexPolygon(((0, 0), (0, 1), (2, 1), (2, 0))).area == 2.0
    assert polygon_area(None) == 0.0


def test_clip_offset_squares():
    a = ConvexPolygon(((0, 0), (2, 0), (2, 2), (0, 2)))
    b = ConvexPolygon(((1, 1), (3, 1), (3, 3), (1, 3)))
    out = clip_convex(a, b)
    assert out is not None
    assert out.area == pytest.approx(1.0, abs=1e-12)


def test_clip_disjoint_and_touching():
    a = ConvexPolygon(((0, 0), (1, 0), (1, 1), (0, 1)))
    far = ConvexPolygon(((5, 5), (6, 5), (6, 6), (5, 6)))
    assert clip_convex(a, far) is None
    # sharing an edge only: zero-area overlap collapses to nothing
    adjacent = ConvexPolygon(((1, 0), (2, 0), (2, 1), (1, 1)))
    assert clip_convex(a, adjacent) is None


def test_clip_containment():
    outer = ConvexPolygon(((0, 0), (10, 0), (10, 10), (0, 10)))
    inner = ConvexPolygon(((2, 2), (4, 2), (4, 5), (2, 5)))
    assert clip_convex(outer, inner).area == pytest.approx(6.0, abs=1e-12)
    assert clip_convex(inner, outer).area == pytest.approx(6.0, abs=1e-12)


def test_clip_triangle_through_square():
    square = ConvexPolygon(((0, 0), (4, 0), (4, 4), (0, 4)))
    tri = ConvexPolygon(((2, -2), (6, 2), (2, 6)))
    out = clip_convex(square, tri)
    # half-plane x+y>=... worked out by hand: the triangle cuts two corners
    assert out.area == pytest.approx(8.0, abs=1e-9)


def test_iou_axis_aligned_thirds():
    a = OrientedBox(1.0, 1.0, 2.0, 2.0, 0.0)
    b = OrientedBox(2.0, 1.0, 2.0, 2.0, 0.0)
    assert rotated_iou(a, b) == pytest.approx(1.0 / 3.0, abs=1e-15)


def test_iou_square_rotated_45_degrees():
    a = OrientedBox(0, 0, 2, 2, 0)
    b = OrientedBox(0, 0, 2, 2, math.pi / 4)
    want = 1.0 / math.sqrt(2.0)  # octagon overlap, known closed form
    assert rotated_iou(a, b) == pytest.approx(want, abs=1e-12)


def test_iou_identical_boxes():
    assert rotated_iou(OrientedBox(3, 4, 5, 2, 0), OrientedBox(3, 4, 5, 2, 0)) == 1.0
    tilted = OrientedBox(3, 4, 5, 2, 0.7)
    assert rotated_iou(tilted, tilted) == pytest.approx(1.0, abs=1e-9)


def test_iou_heading_is_invisible_to_overlap():
    box = OrientedBox(10, -4, 6, 3, 0.5)
    flipped = OrientedBox(10, -4, 6, 3, 0.5 - math.pi)
    assert rotated_iou(box, flipped) == pytest.approx(1.0, abs=1e-9)


def test_iou_disjoint():
    assert rotated_iou(OrientedBox(0, 0, 2, 2, 0.3), OrientedBox(100, 100, 2, 2, -0.8)) == 0.0


def test_iou_contained():
    outer = OrientedBox(0, 0, 10, 10, 0)
    inner = OrientedBox(1, -1, 2, 3, 1.1)
    assert rotated_iou(outer, inner) == pytest.approx(6.0 / 100.0, abs=1e-12)


def test_iou_swap_symmetry_is_exact():
    rng = random.Random(201)
    for _ in range(300):
        a = rand_obox(rng, span=30.0, dims=(2.0, 20.0))
        b = rand_obox(rng, span=30.0, dims=(2.0, 20.0))
        assert rotated_iou(a, b) == rotated_iou(b, a)


def test_iou_bounded():
    rng = random.Random(202)
    for _ in range(300):
        v = rotated_iou(rand_obox(rng, span=15.0), rand_obox(rng, span=15.0))
        assert 0.0 <= v <= 1.0


def test_iou_positive_when_centers_coincide():
    rng = random.Random(204)
    for _ in range(100):
        a = rand_obox(rng, span=5.0)
        b = OrientedBox(a.cx, a.cy, rng.uniform(2, 40), rng.uniform(2, 40), rng.uniform(-3, 3))
        assert rotated_iou(a, b) > 0.0


def test_iou_scale_invariant():
    rng = random.Random(205)
    for _ in range(100):
        a = rand_obox(rng, span=10.0)
        b = rand_obox(rng, span=10.0)
        base = rotated_iou(a, b)
        for s in (0.25, 3.0, 117.0):
            sa = OrientedBox(a.cx * s, a.cy * s, a.w * s, a.h * s, a.theta)
            sb = OrientedBox(b.cx * s, b.cy * s, b.w * s, b.h * s, b.theta)
            assert rotated_iou(sa, sb) == pytest.approx(base, abs=1e-9)


def test_iou_against_sampling_oracle():
    # cheap screen; the acceptance suite runs the full-resolution version
    rng = random.Random(203)
    for i in range(25):
        a = rand_obox(rng, span=10.0, dims=(4.0, 20.0))
        b = rand_obox(rng, span=10.0, dims=(4.0, 20.0))
        est = mc_iou(a, b, samples=250_000, seed=i)
        assert rotated_iou(a, b) == pytest.approx(est, abs=5e-3)
