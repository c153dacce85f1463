"""Annotation and prediction file formats, plus geometric validation.

Text formats are whitespace-separated, UTF-8, LF line endings. Blank
lines and lines starting with '#' are skipped on parse and never
written. Coordinates are written in the shortest decimal form that
round-trips, with integral values printed bare (63, not 63.0), so a
parse/write cycle is the identity on records and writer output is
byte-stable.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass, replace
from typing import Iterable, Iterator, Sequence

from .errors import DegenerateGeometryError, InvalidValueError, ParseError
from .geometry import QuadBox, cyclic_shift, signed_area

BOUNDS_TOLERANCE = 1e-6

FINDING_CODES = (
    "ok",
    "not_clockwise",
    "not_convex",
    "not_rectangular",
    "out_of_bounds",
    "malformed",
)


@dataclass(frozen=True)
class AnnotationRecord:
    """One ground-truth box: quad corners, class label, difficulty flag."""

    quad: QuadBox
    label: str
    difficulty: int = 0

    def __post_init__(self) -> None:
        if not self.label:
            raise InvalidValueError("label must be non-empty")
        if self.difficulty < 0:
            raise InvalidValueError(f"difficulty must be >= 0, got {self.difficulty}")


@dataclass(frozen=True)
class DetectionRecord:
    """One predicted box with a confidence score in [0, 1]."""

    quad: QuadBox
    label: str
    score: float

    def __post_init__(self) -> None:
        if not self.label:
            raise InvalidValueError("label must be non-empty")
        if not (math.isfinite(self.score) and 0.0 <= self.score <= 1.0):
            raise InvalidValueError(f"score must be in [0, 1], got {self.score!r}")


@dataclass(frozen=True)
class Finding:
    record_index: int
    code: str
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    """One tuple of findings per input record; clean records get a single 'ok'."""

    findings: tuple[tuple[Finding, ...], ...]

    @property
    def all_ok(self) -> bool:
        return all(f.code == "ok" for per_record in self.findings for f in per_record)

    def issues(self) -> Iterator[Finding]:
        for per_record in self.findings:
            for f in per_record:
                if f.code != "ok":
                    yield f


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"non-numeric {what}: {token!r}", line=lineno) from None


def parse_dota_file(text: str) -> list[AnnotationRecord]:
    """Parse annotation lines: xA yA xB yB xC yC xD yD label difficulty."""
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 10:
            raise ParseError(
                f"expected 8 coordinates, a label and a difficulty (10 fields), got {len(tokens)}",
                line=lineno,
            )
        coords = [_parse_float(tok, lineno, "coordinate") for tok in tokens[:8]]
        try:
            difficulty = int(tokens[9])
        except ValueError:
            raise ParseError(f"difficulty must be an integer, got {tokens[9]!r}", line=lineno) from None
        if difficulty < 0:
            raise ParseError(f"difficulty must be >= 0, got {difficulty}", line=lineno)
        records.append(AnnotationRecord(QuadBox.from_flat(coords), tokens[8], difficulty))
    return records


def _format_coord(v: float) -> str:
    if math.isfinite(v) and v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def write_dota_file(records: Iterable[AnnotationRecord]) -> str:
    """Serialize records, one LF-terminated line each."""
    lines = []
    for rec in records:
        parts = [_format_coord(v) for v in rec.quad.flat]
        parts.append(rec.label)
        parts.append(str(rec.difficulty))
        lines.append(" ".join(parts))
    return "".join(line + "\n" for line in lines)


def parse_predictions(text: str) -> list[tuple[str, DetectionRecord]]:
    """Parse prediction lines: image_id 8-coords label score."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 11:
            raise ParseError(
                f"expected image id, 8 coordinates, label and score (11 fields), got {len(tokens)}",
                line=lineno,
            )
        coords = [_parse_float(tok, lineno, "coordinate") for tok in tokens[1:9]]
        score = _parse_float(tokens[10], lineno, "score")
        if not (math.isfinite(score) and 0.0 <= score <= 1.0):
            raise ParseError(f"score must be in [0, 1], got {tokens[10]}", line=lineno)
        out.append((tokens[0], DetectionRecord(QuadBox.from_flat(coords), tokens[9], score)))
    return out


def parse_corrections(text: str) -> dict[tuple[str, int], int]:
    """Parse a corrections sidecar: image_id record_index k, one per line."""
    out: dict[tuple[str, int], int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 3:
            raise ParseError(f"expected image_id, record index and shift (3 fields), got {len(tokens)}", line=lineno)
        try:
            index = int(tokens[1])
            shift = int(tokens[2])
        except ValueError:
            raise ParseError(f"index and shift must be integers: {line!r}", line=lineno) from None
        if index < 0:
            raise ParseError(f"record index must be >= 0, got {index}", line=lineno)
        key = (tokens[0], index)
        if key in out:
            raise ParseError(f"duplicate correction for {tokens[0]} record {index}", line=lineno)
        out[key] = shift
    return out


def _local_name(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _walk(elem: ET.Element, prefix: str) -> Iterator[tuple[str, ET.Element]]:
    counts: dict[str, int] = {}
    for child in elem:
        name = _local_name(child.tag)
        counts[name] = counts.get(name, 0) + 1
        path = f"{prefix}/{name}[{counts[name]}]"
        yield path, child
        yield from _walk(child, path)


def _parse_points_attr(value: str, path: str) -> list[float]:
    tokens = value.split()
    coords: list[float] = []
    if tokens and all("," in tok for tok in tokens):
        pairs = tokens
    elif len(tokens) == 8:
        pairs = [f"{tokens[i]},{tokens[i + 1]}" for i in range(0, 8, 2)]
    else:
        raise ParseError(f"expected 4 coordinate pairs, got {len(tokens)} token(s)", path=path)
    if len(pairs) != 4:
        raise ParseError(f"expected 4 coordinate pairs, got {len(pairs)}", path=path)
    for pair in pairs:
        parts = pair.split(",")
        if len(parts) != 2:
            raise ParseError(f"bad coordinate pair {pair!r}", path=path)
        for p in parts:
            try:
                coords.append(float(p))
            except ValueError:
                raise ParseError(f"non-numeric coordinate {p!r}", path=path) from None
    return coords


def parse_icdar_xml(
    text: str,
    region_tag: str = "tableRegion",
    coords_tag: str = "Coords",
    points_attr: str = "points",
) -> list[AnnotationRecord]:
    """Extract table regions from competition-style XML.

    Looks for region elements anywhere in the document and reads four
    coordinate pairs from their points attribute (on the region itself
    or on a nested coords element). Corner order is preserved exactly as
    written; normalization is a separate explicit step (icdar_to_r360).
    Element and attribute names vary between releases, hence the
    keyword configuration.
    """
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise ParseError(f"malformed XML: {exc}") from exc
    records = []
    root_path = _local_name(root.tag)
    for path, elem in _walk(root, root_path):
        if _local_name(elem.tag) != region_tag:
            continue
        value = elem.get(points_attr)
        src_path = path
        if value is None:
            for sub_path, sub in _walk(elem, path):
                if _local_name(sub.tag) == coords_tag and sub.get(points_attr) is not None:
                    value = sub.get(points_attr)
                    src_path = sub_path
                    break
        if value is None:
            raise ParseError(f"region has no {points_attr!r} attribute", path=path)
        coords = _parse_points_attr(value, src_path)
        records.append(AnnotationRecord(QuadBox.from_flat(coords), "table", 0))
    return records


def icdar_to_r360(record: AnnotationRecord, shift: int = 0) -> AnnotationRecord:
    """Normalize a parsed region to clockwise order with a canonical start.

    The ring is reversed when counterclockwise, then corner A is moved
    to the corner nearest the image origin (minimum x + y, ties toward
    smaller y then smaller x). Which corner is the table's own top-left
    is content knowledge no geometric rule can recover, so callers pass
    the remaining cyclic shift explicitly, mirroring the hand-adjusted
    files in the source data. For any fixed shift the whole
    normalization is idempotent.
    """
    for x, y in record.quad.corners:
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InvalidValueError("corners must be finite")
    quad = record.quad
    area = signed_area(quad)
    if area == 0.0:
        raise DegenerateGeometryError("region has zero area")
    if area < 0.0:
        quad = QuadBox(tuple(reversed(quad.corners)))
    corners = quad.corners
    start = min(range(4), key=lambda i: (corners[i][0] + corners[i][1], corners[i][1], corners[i][0]))
    quad = cyclic_shift(quad, start)
    quad = cyclic_shift(quad, shift)
    return replace(record, quad=quad)


def _turn_signs(pts) -> tuple[bool, bool]:
    pos = neg = False
    for i in range(4):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % 4]
        cx, cy = pts[(i + 2) % 4]
        cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
        scale = math.dist((ax, ay), (bx, by)) * math.dist((bx, by), (cx, cy))
        if cross > 1e-9 * scale:
            pos = True
        elif cross < -1e-9 * scale:
            neg = True
    return pos, neg


def _rectangle_defect(pts, rel_tol: float = 1e-6) -> str | None:
    a, b, c, d = pts
    ab = math.dist(a, b)
    bc = math.dist(b, c)
    cd = math.dist(c, d)
    da = math.dist(d, a)
    if min(ab, bc, cd, da) <= 0.0:
        return "zero-length edge"
    if abs(ab - cd) > rel_tol * max(ab, cd) or abs(bc - da) > rel_tol * max(bc, da):
        return f"opposite edges differ: {ab:g} vs {cd:g}, {bc:g} vs {da:g}"
    dot = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1])
    if abs(dot) > rel_tol * ab * bc:
        return f"adjacent edges not perpendicular (dot={dot:g})"
    return None


def validate_annotations(
    records: Sequence[AnnotationRecord],
    canvas: tuple[int, int] | None = None,
) -> ValidationReport:
    """Geometric lint for annotation records.

    Checks each record for clockwise order, convexity, rectangularity
    (1e-6 relative) and, when a (width, height) canvas is given, corner
    containment within 1e-6 px. Findings are reported per record in a
    fixed order; a record with no problems gets the single finding 'ok'.
    """
    per_record = []
    for idx, rec in enumerate(records):
        pts = rec.quad.corners
        findings: list[Finding] = []
        if any(not (math.isfinite(x) and math.isfinite(y)) for x, y in pts):
            findings.append(Finding(idx, "malformed", "non-finite corner coordinate"))
        else:
            area = signed_area(rec.quad)
            if area <= 0.0:
                findings.append(
                    Finding(idx, "not_clockwise", f"signed area {area:g}; clockwise rings are positive")
                )
            pos, neg = _turn_signs(pts)
            if pos and neg:
                findings.append(Finding(idx, "not_convex", "corner turns change direction"))
            defect = _rectangle_defect(pts)
            if defect is not None:
                findings.append(Finding(idx, "not_rectangular", defect))
            if canvas is not None:
                width, height = canvas
                for corner_index, (x, y) in enumerate(pts):
                    if (
                        x < -BOUNDS_TOLERANCE
                        or x > width + BOUNDS_TOLERANCE
                        or y < -BOUNDS_TOLERANCE
                        or y > height + BOUNDS_TOLERANCE
                    ):
                        findings.append(
                            Finding(
                                idx,
                                "out_of_bounds",
                                f"corner {corner_index} at ({x:g}, {y:g}) outside {width}x{height}",
                            )
                        )
                        break
        if not findings:
            findings.append(Finding(idx, "ok", ""))
        per_record.append(tuple(findings))
    return ValidationReport(tuple(per_record))
