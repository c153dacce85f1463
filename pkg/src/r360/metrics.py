"""Angle-constrained detection metrics and the two reference losses.

A detection only counts as a true positive when it clears two gates at
once: region overlap (rotated IoU strictly above the IoU threshold) and
head direction (circular angle difference strictly below the angle
threshold). With the angle threshold at 360 degrees the second gate can
never fire, since two angles are at most 180 degrees apart, so that
setting reproduces a plain region-only evaluation exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import ContractViolationError, InvalidValueError, ShapeError
from .formats import AnnotationRecord, DetectionRecord
from .geometry import OrientedBox, QuadBox, angle_difference, min_area_rect, qbox_to_rbox
from .polygon import rotated_iou
from .version import __version__


@dataclass(frozen=True)
class EvalConfig:
    """One evaluation setting: IoU gate plus angle gate in degrees."""

    iou_threshold: float
    angle_threshold_deg: float
    name: str = ""

    def __post_init__(self) -> None:
        if not 0.0 < self.iou_threshold < 1.0:
            raise InvalidValueError(f"iou_threshold must be in (0, 1), got {self.iou_threshold}")
        if not 0.0 < self.angle_threshold_deg <= 360.0:
            raise InvalidValueError(
                f"angle_threshold_deg must be in (0, 360], got {self.angle_threshold_deg}"
            )
        if not self.name:
            auto = f"ap{round(self.iou_threshold * 100)}t{round(self.angle_threshold_deg)}"
            object.__setattr__(self, "name", auto)


PRESETS: dict[str, EvalConfig] = {
    "ap50t90": EvalConfig(0.5, 90.0),
    "ap75t40": EvalConfig(0.75, 40.0),
    "ap50t360": EvalConfig(0.5, 360.0),
}


@dataclass(frozen=True)
class MatchResult:
    """Per-image matching outcome; detections in descending-score order."""

    det_scores: tuple[float, ...]
    det_is_tp: tuple[bool, ...]
    gt_matched: tuple[bool, ...]

    @property
    def tp(self) -> int:
        return sum(self.det_is_tp)

    @property
    def fp(self) -> int:
        return len(self.det_is_tp) - self.tp

    @property
    def fn(self) -> int:
        return len(self.gt_matched) - sum(self.gt_matched)


def _record_box(quad: QuadBox) -> OrientedBox:
    # clean rectangles convert exactly; noisy quads (typically predicted
    # corners) fall back to their minimal enclosing rectangle with the
    # head kept at the written A corner
    try:
        return qbox_to_rbox(quad)
    except ShapeError:
        return min_area_rect(quad.corners, head_hint=quad.corners[0])


def match_detections(
    detections: Sequence[DetectionRecord],
    ground_truths: Sequence[AnnotationRecord],
    config: EvalConfig,
) -> MatchResult:
    """Greedy single-image matching under both gates.

    Detections are processed by descending score (ties keep input
    order). Each one is paired with the not-yet-matched ground truth of
    highest rotated IoU (ties keep the earlier ground truth) and becomes
    a true positive only if that IoU strictly exceeds the IoU threshold
    and the circular angle difference is strictly below the angle
    threshold. Only true positives consume their ground truth. All
    records must belong to one image and one class; mixing classes here
    is a caller bug, not data to be scored.
    """
    labels = {r.label for r in detections} | {r.label for r in ground_truths}
    if len(labels) > 1:
        raise ContractViolationError(f"records mix classes {sorted(labels)}; match one class at a time")
    gt_boxes = [_record_box(g.quad) for g in ground_truths]
    matched = [False] * len(ground_truths)
    order = sorted(range(len(detections)), key=lambda i: -detections[i].score)
    angle_gate = math.radians(config.angle_threshold_deg)
    scores = []
    flags = []
    for i in order:
        det = detections[i]
        box = _record_box(det.quad)
        best_j = -1
        best_iou = 0.0
        for j, gt_box in enumerate(gt_boxes):
            if matched[j]:
                continue
            iou = rotated_iou(box, gt_box)
            if iou > best_iou:
                best_j, best_iou = j, iou
        is_tp = (
            best_j >= 0
            and best_iou > config.iou_threshold
            and angle_difference(box.theta, gt_boxes[best_j].theta) < angle_gate
        )
        if is_tp:
            matched[best_j] = True
        scores.append(det.score)
        flags.append(is_tp)
    return MatchResult(tuple(scores), tuple(flags), tuple(matched))


def pr_curve(matches: Iterable[MatchResult], total_gt: int) -> list[tuple[float, float]]:
    """Global precision/recall sweep over all detections.

    Detections from all images are ranked together by descending score
    (ties keep the order the matches were supplied in). Point k is
    (recall, precision) after the top k detections. With zero ground
    truths recall is reported as 0.
    """
    if total_gt < 0:
        raise InvalidValueError(f"total_gt must be >= 0, got {total_gt}")
    pairs: list[tuple[float, bool]] = []
    for m in matches:
        pairs.extend(zip(m.det_scores, m.det_is_tp))
    ranked = sorted(pairs, key=lambda p: -p[0])
    curve = []
    tp = 0
    for k, (_, is_tp) in enumerate(ranked, start=1):
        tp += is_tp
        precision = tp / k
        recall = tp / total_gt if total_gt else 0.0
        curve.append((recall, precision))
    return curve


def average_precision_11pt(curve: Sequence[tuple[float, float]]) -> float:
    """11-point interpolated AP.

    Mean over recall levels 0.0, 0.1, ..., 1.0 of the maximum precision
    among curve points whose recall is at least that level (0 when no
    point reaches it). An empty curve scores 0.
    """
    if not curve:
        return 0.0
    total = 0.0
    for i in range(11):
        level = i / 10.0
        best = 0.0
        for recall, precision in curve:
            if recall >= level and precision > best:
                best = precision
        total += best
    return total / 11.0


@dataclass(frozen=True)
class ConfigResult:
    config: EvalConfig
    tp: int
    fp: int
    fn: int
    ap: float
    pr_curve: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class EvalReport:
    """Per-config results plus dataset totals; serializes to stable JSON."""

    results: tuple[ConfigResult, ...]
    total_images: int
    total_ground_truths: int
    total_detections: int
    warnings: tuple[str, ...] = ()

    def result_for(self, name: str) -> ConfigResult:
        for r in self.results:
            if r.config.name == name:
                return r
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "tool": "r360",
            "version": __version__,
            "total_images": self.total_images,
            "total_ground_truths": self.total_ground_truths,
            "total_detections": self.total_detections,
            "warnings": list(self.warnings),
            "configs": [
                {
                    "name": r.config.name,
                    "iou_threshold": r.config.iou_threshold,
                    "angle_threshold_deg": r.config.angle_threshold_deg,
                    "tp": r.tp,
                    "fp": r.fp,
                    "fn": r.fn,
                    "ap": r.ap,
                    "pr_curve": [[recall, precision] for recall, precision in r.pr_curve],
                }
                for r in self.results
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def evaluate(
    detections_by_image: Mapping[str, Sequence[DetectionRecord]],
    ground_truths_by_image: Mapping[str, Sequence[AnnotationRecord]],
    configs: Sequence[EvalConfig],
) -> EvalReport:
    """Match, sweep and score every config over a whole image set.

    Images are processed in sorted id order and, within an image,
    records are matched one class at a time, so the reduction is
    deterministic. Detections for image ids with no ground truth file
    simply count as false positives.
    """
    image_ids = sorted(set(detections_by_image) | set(ground_truths_by_image))
    total_gt = sum(len(ground_truths_by_image.get(i, ())) for i in image_ids)
    total_det = sum(len(detections_by_image.get(i, ())) for i in image_ids)
    results = []
    for config in configs:
        matches = []
        for image_id in image_ids:
            dets = list(detections_by_image.get(image_id, ()))
            gts = list(ground_truths_by_image.get(image_id, ()))
            for label in sorted({r.label for r in dets} | {r.label for r in gts}):
                matches.append(
                    match_detections(
                        [d for d in dets if d.label == label],
                        [g for g in gts if g.label == label],
                        config,
                    )
                )
        curve = pr_curve(matches, total_gt)
        ap = average_precision_11pt(curve)
        tp = sum(m.tp for m in matches)
        fp = sum(m.fp for m in matches)
        results.append(ConfigResult(config, tp, fp, total_gt - tp, ap, tuple(curve)))
    return EvalReport(
        results=tuple(results),
        total_images=len(image_ids),
        total_ground_truths=total_gt,
        total_detections=total_det,
    )


def riou_loss(predicted: OrientedBox, target: OrientedBox) -> float:
    """Region loss: 1 - rotated IoU, in [0, 1]."""
    return 1.0 - rotated_iou(predicted, target)


def angle_l1_loss(theta_p: float, theta_g: float) -> float:
    """Plain absolute difference of two box angles, exactly as trained.

    Deliberately not circular: near the -pi/pi seam the value approaches
    2*pi even though the circular distance (angle_difference) is tiny.
    Inputs must already be wrapped to [-pi, pi).
    """
    for v in (theta_p, theta_g):
        if not (math.isfinite(v) and -math.pi <= v < math.pi):
            raise ContractViolationError(f"angle {v!r} outside [-pi, pi)")
    return abs(theta_p - theta_g)
