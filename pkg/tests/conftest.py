"""Shared helpers and reference oracles.

mc_iou estimates rotated IoU without touching the clipping code. Points
are stratified over the smaller box in its own frame and membership in
the other box is tested in that box's frame, so the only assumption
shared with the library is the corner parameterization, which
test_geometry pins to hand-computed corners separately.
"""
import math
import random

import numpy as np

from r360 import OrientedBox


def rand_obox(rng: random.Random, span: float = 200.0, dims=(2.0, 60.0)) -> OrientedBox:
    return OrientedBox(
        rng.uniform(-span, span),
        rng.uniform(-span, span),
        rng.uniform(dims[0], dims[1]),
        rng.uniform(dims[0], dims[1]),
        rng.uniform(-math.pi, math.pi),
    )


def mc_iou(a: OrientedBox, b: OrientedBox, samples: int = 1_000_000, seed: int = 0) -> float:
    """Stratified Monte-Carlo IoU estimate (one jittered point per cell)."""
    small, big = sorted((a, b), key=lambda r: r.w * r.h)
    side = int(math.isqrt(samples))
    n = side * side
    g = np.random.default_rng(seed)
    ii = np.repeat(np.arange(side), side)
    jj = np.tile(np.arange(side), side)
    u = ((ii + g.random(n)) / side - 0.5) * small.w
    v = ((jj + g.random(n)) / side - 0.5) * small.h
    ca, sa = math.cos(small.theta), math.sin(small.theta)
    px = small.cx + u * ca - v * sa
    py = small.cy + u * sa + v * ca
    dx = px - big.cx
    dy = py - big.cy
    cb, sb = math.cos(big.theta), math.sin(big.theta)
    inside = (np.abs(dx * cb + dy * sb) <= big.w / 2) & (np.abs(-dx * sb + dy * cb) <= big.h / 2)
    inter = small.w * small.h * float(np.count_nonzero(inside)) / n
    union = a.w * a.h + b.w * b.h - inter
    return inter / union
