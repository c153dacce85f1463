"""Rotation of raster images plus their corner annotations.

The rotation here grows the output canvas to hold the whole rotated
image (no cropping) and re-centers the content, then maps annotation
corners through the exact same affine transform. Rotating the image by
phi degrees counterclockwise on screen turns every box angle by -phi:
theta' = wrap(theta - radians(phi)).
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from PIL import Image

from .errors import ContractViolationError, InvalidValueError
from .formats import AnnotationRecord
from .geometry import Point, QuadBox

# Trig noise can push an exactly integral extent a few ulps high; the
# guard keeps that from growing the canvas by a full pixel.
_CEIL_GUARD = 1e-9


@dataclass(frozen=True)
class AffineTransform:
    """Row-major 2x3 matrix: (x, y) -> (m00 x + m01 y + m02, m10 x + m11 y + m12)."""

    m00: float
    m01: float
    m02: float
    m10: float
    m11: float
    m12: float

    def apply(self, x: float, y: float) -> Point:
        return (
            self.m00 * x + self.m01 * y + self.m02,
            self.m10 * x + self.m11 * y + self.m12,
        )

    @property
    def determinant(self) -> float:
        return self.m00 * self.m11 - self.m01 * self.m10

    def inverted(self) -> "AffineTransform":
        det = self.determinant
        if abs(det) < 1e-12:
            raise ContractViolationError(f"transform is singular (det={det:g})")
        i00 = self.m11 / det
        i01 = -self.m01 / det
        i10 = -self.m10 / det
        i11 = self.m00 / det
        return AffineTransform(
            i00,
            i01,
            -(i00 * self.m02 + i01 * self.m12),
            i10,
            i11,
            -(i10 * self.m02 + i11 * self.m12),
        )


@dataclass(frozen=True)
class CanvasSize:
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InvalidValueError(f"canvas must be at least 1x1, got {self.width}x{self.height}")


@dataclass(eq=False)
class RasterImage:
    """8-bit raster, shape (height, width, channels) with 1 or 3 channels."""

    pixels: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.pixels)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise InvalidValueError(f"expected (h, w, 1|3) pixels, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            raise InvalidValueError(f"pixels must be uint8, got {arr.dtype}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise InvalidValueError("image must be at least 1x1")
        self.pixels = arr

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @classmethod
    def load(cls, path) -> "RasterImage":
        with Image.open(path) as im:
            mode = "L" if im.mode in ("1", "L", "LA", "I", "I;16") else "RGB"
            arr = np.asarray(im.convert(mode), dtype=np.uint8)
        return cls(arr)

    def save(self, path) -> None:
        """Write as PNG (lossless, so round trips are exact)."""
        if self.channels == 1:
            Image.fromarray(self.pixels[:, :, 0], mode="L").save(path, format="PNG")
        else:
            Image.fromarray(self.pixels, mode="RGB").save(path, format="PNG")


@dataclass(frozen=True)
class RotationSpec:
    """One rotation: phi in degrees (positive turns the content
    counterclockwise on screen), fill for exposed canvas, interpolation
    ("bilinear" or "nearest", the latter for exact pixel comparisons)."""

    phi_degrees: float
    fill: int | tuple[int, ...] = 255
    interpolation: str = "bilinear"

    def __post_init__(self) -> None:
        if not math.isfinite(self.phi_degrees):
            raise InvalidValueError(f"phi must be finite, got {self.phi_degrees!r}")
        if self.interpolation not in ("bilinear", "nearest"):
            raise InvalidValueError(f"unknown interpolation {self.interpolation!r}")


def rotation_matrix(center: Point, phi_degrees: float) -> AffineTransform:
    """Affine rotation by phi degrees about center, y-down screen frame."""
    phi = math.radians(phi_degrees)
    alpha = math.cos(phi)
    beta = math.sin(phi)
    cx, cy = float(center[0]), float(center[1])
    return AffineTransform(
        alpha,
        beta,
        (1.0 - alpha) * cx - beta * cy,
        -beta,
        alpha,
        beta * cx + (1.0 - alpha) * cy,
    )


def adapt_bounds(t: AffineTransform, width: int, height: int) -> tuple[AffineTransform, CanvasSize]:
    """Grow the canvas so the whole rotated image fits, and re-center.

    For a rotation the linear part satisfies |m00| = cos and |m01| = sin
    of the rotation magnitude, so the rotated extent of a width x height
    image is (height sin + width cos, height cos + width sin). The canvas
    is that extent rounded up (rounding down is how content gets
    cropped), and the translation shifts by half the growth so the
    content stays centered.
    """
    if width < 1 or height < 1:
        raise InvalidValueError(f"image must be at least 1x1, got {width}x{height}")
    cos = abs(t.m00)
    sin = abs(t.m01)
    new_w = math.ceil(height * sin + width * cos - _CEIL_GUARD)
    new_h = math.ceil(height * cos + width * sin - _CEIL_GUARD)
    shifted = AffineTransform(
        t.m00,
        t.m01,
        t.m02 + (new_w - width) * 0.5,
        t.m10,
        t.m11,
        t.m12 + (new_h - height) * 0.5,
    )
    return shifted, CanvasSize(new_w, new_h)


def apply_to_points(t: AffineTransform, points: Sequence[Point]) -> list[Point]:
    """Map points through t, order preserved."""
    return [t.apply(x, y) for x, y in points]


def _normalize_fill(fill, channels: int) -> np.ndarray:
    if isinstance(fill, (int, np.integer)):
        vec = (int(fill),) * channels
    else:
        vec = tuple(int(v) for v in fill)
        if len(vec) == 1:
            vec = vec * channels
        elif len(vec) != channels:
            if channels == 1 and len(set(vec)) == 1:
                vec = (vec[0],)
            else:
                raise InvalidValueError(f"fill has {len(vec)} values for {channels} channel(s)")
    for v in vec:
        if not 0 <= v <= 255:
            raise InvalidValueError(f"fill values must be 8-bit, got {v}")
    return np.array(vec, dtype=np.float64)


def warp_image(
    src: RasterImage,
    t: AffineTransform,
    canvas: CanvasSize,
    fill: int | Sequence[int] = 255,
    interpolation: str = "bilinear",
) -> RasterImage:
    """Inverse-map the source through t onto a canvas-sized image.

    Each destination pixel center is pulled back through the inverse of
    t and sampled from the source. Bilinear sampling blends the four
    surrounding pixel centers; any sample or blend partner outside the
    source uses the fill value. Pixel (i, j) has its center at
    (j + 0.5, i + 0.5), so an identity transform reproduces the source
    bit for bit.
    """
    if interpolation not in ("bilinear", "nearest"):
        raise InvalidValueError(f"unknown interpolation {interpolation!r}")
    inv = t.inverted()
    fill_vec = _normalize_fill(fill, src.channels)
    h, w = canvas.height, canvas.width
    gx, gy = np.meshgrid(
        np.arange(w, dtype=np.float64) + 0.5,
        np.arange(h, dtype=np.float64) + 0.5,
    )
    sx = inv.m00 * gx + inv.m01 * gy + inv.m02
    sy = inv.m10 * gx + inv.m11 * gy + inv.m12
    pix = src.pixels.astype(np.float64)

    if interpolation == "nearest":
        j = np.floor(sx).astype(np.int64)
        i = np.floor(sy).astype(np.int64)
        valid = (j >= 0) & (j < src.width) & (i >= 0) & (i < src.height)
        out = pix[np.clip(i, 0, src.height - 1), np.clip(j, 0, src.width - 1)]
        out[~valid] = fill_vec
    else:
        u = sx - 0.5
        v = sy - 0.5
        j0 = np.floor(u).astype(np.int64)
        i0 = np.floor(v).astype(np.int64)
        fu = (u - j0)[:, :, None]
        fv = (v - i0)[:, :, None]
        out = np.zeros((h, w, src.channels), dtype=np.float64)
        corners = (
            (i0, j0, (1.0 - fu) * (1.0 - fv)),
            (i0, j0 + 1, fu * (1.0 - fv)),
            (i0 + 1, j0, (1.0 - fu) * fv),
            (i0 + 1, j0 + 1, fu * fv),
        )
        for ii, jj, weight in corners:
            valid = (jj >= 0) & (jj < src.width) & (ii >= 0) & (ii < src.height)
            vals = pix[np.clip(ii, 0, src.height - 1), np.clip(jj, 0, src.width - 1)]
            vals[~valid] = fill_vec
            out += weight * vals

    data = np.clip(np.rint(out), 0.0, 255.0).astype(np.uint8)
    return RasterImage(data)


def rotate_sample(
    image: RasterImage,
    annotations: Sequence[AnnotationRecord],
    spec: RotationSpec,
) -> tuple[RasterImage, list[AnnotationRecord]]:
    """Rotate one image and its annotations together, bounds adapted.

    Annotations keep corner order (A stays A), so every box angle moves
    by exactly -phi.
    """
    base = rotation_matrix((image.width / 2.0, image.height / 2.0), spec.phi_degrees)
    t, canvas = adapt_bounds(base, image.width, image.height)
    warped = warp_image(image, t, canvas, spec.fill, spec.interpolation)
    rotated = []
    for rec in annotations:
        pts = apply_to_points(t, rec.quad.corners)
        rotated.append(replace(rec, quad=QuadBox(tuple(pts))))
    return warped, rotated


def draw_rotation_angle(seed: int, lo: float, hi: float) -> float:
    """Uniform draw from [lo, hi]; a fixed generator keyed only by seed,
    so equal seeds give equal angles on every run."""
    return random.Random(seed).uniform(lo, hi)


def random_rotate(
    image: RasterImage,
    annotations: Sequence[AnnotationRecord],
    rng_seed: int,
    angle_range: tuple[float, float],
    fill: int | tuple[int, ...] = 255,
    interpolation: str = "bilinear",
) -> tuple[RasterImage, list[AnnotationRecord], float]:
    """Rotate by a seeded uniform angle from angle_range (degrees).

    Returns the rotated image, the rotated annotations and the angle
    that was drawn.
    """
    lo, hi = float(angle_range[0]), float(angle_range[1])
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
        raise InvalidValueError(f"bad angle range [{lo!r}, {hi!r}]")
    phi = draw_rotation_angle(rng_seed, lo, hi)
    warped, rotated = rotate_sample(image, annotations, RotationSpec(phi, fill, interpolation))
    return warped, rotated, phi


def derive_seed(global_seed: int, image_id: str, index: int = 0) -> int:
    """Stable 64-bit per-image seed, independent of processing order."""
    digest = hashlib.sha256(f"{global_seed}:{image_id}:{index}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
