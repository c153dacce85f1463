"""Dataset-level orchestration: conversion, rotated generation, evaluation.

Generation is deterministic end to end: the per-image rotation angle
depends only on (global seed, image id, copy index), every output file
is a pure function of its own inputs, and the manifest is assembled in
sorted order. Worker count therefore changes wall time only, never a
byte of output.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import InvalidValueError, ParseError, ValidationError
from .formats import (
    AnnotationRecord,
    parse_corrections,
    parse_dota_file,
    parse_icdar_xml,
    parse_predictions,
    icdar_to_r360,
    validate_annotations,
    write_dota_file,
)
from .geometry import QuadBox
from .metrics import EvalConfig, EvalReport, evaluate
from .transform import RasterImage, derive_seed, random_rotate
from .version import __version__

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class DatasetStats:
    images: int
    instances: int


@dataclass(frozen=True)
class ManifestEntry:
    source: str
    output: str
    phi_degrees: float
    canvas: tuple[int, int]
    annotations: int


@dataclass(frozen=True)
class DatasetManifest:
    """What a generation run produced, JSON-serializable."""

    seed: int
    angle_range: tuple[float, float]
    multiplicity: int
    split: str | None
    tool_version: str
    entries: tuple[ManifestEntry, ...]
    skipped: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "tool": "r360",
            "version": self.tool_version,
            "seed": self.seed,
            "angle_range": list(self.angle_range),
            "multiplicity": self.multiplicity,
            "split": self.split,
            "images": [
                {
                    "source": e.source,
                    "output": e.output,
                    "phi_degrees": e.phi_degrees,
                    "canvas": list(e.canvas),
                    "annotations": e.annotations,
                }
                for e in self.entries
            ],
            "skipped": list(self.skipped),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n"


def convert_dataset(icdar_dir, out_dir, corrections_file=None) -> DatasetStats:
    """Convert a directory of region XML files to per-image text files.

    Each <stem>.xml becomes <stem>.txt. Corrections supply the extra
    cyclic shift for records whose visual top-left is not the table
    head. Any parse or validation problem aborts the run with the file
    (and record) it came from; a conversion that needs to run twice was
    wrong the first time.
    """
    src = Path(icdar_dir)
    if not src.is_dir():
        raise FileNotFoundError(f"no such directory: {src}")
    corrections = {}
    if corrections_file is not None:
        corrections = parse_corrections(Path(corrections_file).read_text(encoding="utf-8"))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    images = 0
    instances = 0
    for xml_path in sorted(src.glob("*.xml")):
        stem = xml_path.stem
        try:
            records = parse_icdar_xml(xml_path.read_text(encoding="utf-8"))
        except ParseError as exc:
            raise ParseError(f"{exc}", path=f"{xml_path.name}") from exc
        converted = []
        for idx, rec in enumerate(records):
            shift = corrections.get((stem, idx), 0)
            try:
                converted.append(icdar_to_r360(rec, shift))
            except ValueError as exc:
                raise ValidationError(f"{xml_path.name} record {idx}: {exc}") from exc
        report = validate_annotations(converted)
        if not report.all_ok:
            bad = next(report.issues())
            raise ValidationError(
                f"{xml_path.name} record {bad.record_index}: {bad.code} ({bad.detail})"
            )
        (out / f"{stem}.txt").write_text(write_dota_file(converted), encoding="utf-8")
        images += 1
        instances += len(converted)
    return DatasetStats(images, instances)


def _axis_aligned(rec: AnnotationRecord) -> AnnotationRecord:
    xs = [x for x, _ in rec.quad.corners]
    ys = [y for _, y in rec.quad.corners]
    x0, x1 = min(xs), max(xs)
    y0, y1 = min(ys), max(ys)
    return replace(rec, quad=QuadBox(((x0, y0), (x1, y0), (x1, y1), (x0, y1))))


def generate_rotated_dataset(
    images_dir,
    ann_dir,
    out_dir,
    seed: int,
    angle_range: tuple[float, float],
    multiplicity: int = 1,
    fill: int | tuple[int, ...] = 255,
    split: str | None = None,
    workers: int = 1,
    interpolation: str = "bilinear",
) -> DatasetManifest:
    """Rotate every image/annotation pair by seeded random angles.

    Writes rotated PNGs under images/, oriented annotations under
    ann_<split>_obbox/ and their axis-aligned bounding quads under
    ann_<split>_hbb/ (folder names drop the split part when none is
    given), plus manifest.json. Images and annotations pair by stem;
    anything unpaired is skipped and listed in the manifest.
    """
    lo, hi = float(angle_range[0]), float(angle_range[1])
    if lo > hi:
        raise InvalidValueError(f"bad angle range [{lo}, {hi}]")
    if multiplicity < 1:
        raise InvalidValueError(f"multiplicity must be >= 1, got {multiplicity}")
    if workers < 1:
        raise InvalidValueError(f"workers must be >= 1, got {workers}")
    images_dir = Path(images_dir)
    ann_dir = Path(ann_dir)
    if not images_dir.is_dir():
        raise FileNotFoundError(f"no such directory: {images_dir}")
    if not ann_dir.is_dir():
        raise FileNotFoundError(f"no such directory: {ann_dir}")

    image_paths: dict[str, Path] = {}
    skipped = []
    for p in sorted(images_dir.iterdir()):
        if p.suffix.lower() not in IMAGE_EXTENSIONS:
            continue
        if p.stem in image_paths:
            skipped.append(f"duplicate image stem skipped: {p.name}")
            continue
        image_paths[p.stem] = p
    ann_stems = {p.stem for p in ann_dir.glob("*.txt")}
    for stem in sorted(set(image_paths) - ann_stems):
        skipped.append(f"image without annotations skipped: {stem}")
    for stem in sorted(ann_stems - set(image_paths)):
        skipped.append(f"annotations without image skipped: {stem}")
    stems = sorted(set(image_paths) & ann_stems)

    out = Path(out_dir)
    part = f"_{split}" if split else ""
    img_out = out / "images"
    obb_out = out / f"ann{part}_obbox"
    hbb_out = out / f"ann{part}_hbb"
    for d in (img_out, obb_out, hbb_out):
        d.mkdir(parents=True, exist_ok=True)

    def job(stem: str) -> list[ManifestEntry]:
        image = RasterImage.load(image_paths[stem])
        records = parse_dota_file((ann_dir / f"{stem}.txt").read_text(encoding="utf-8"))
        entries = []
        for idx in range(multiplicity):
            child_seed = derive_seed(seed, stem, idx)
            rotated_img, rotated_recs, phi = random_rotate(
                image, records, child_seed, (lo, hi), fill=fill, interpolation=interpolation
            )
            report = validate_annotations(
                rotated_recs, canvas=(rotated_img.width, rotated_img.height)
            )
            if not report.all_ok:
                bad = next(report.issues())
                raise ValidationError(f"{stem}: rotated record {bad.record_index} {bad.code} ({bad.detail})")
            suffix = f"_{idx}" if multiplicity > 1 else ""
            out_stem = f"{stem}{suffix}_rot{phi:+08.3f}"
            rotated_img.save(img_out / f"{out_stem}.png")
            (obb_out / f"{out_stem}.txt").write_text(write_dota_file(rotated_recs), encoding="utf-8")
            hbb_records = [_axis_aligned(r) for r in rotated_recs]
            (hbb_out / f"{out_stem}.txt").write_text(write_dota_file(hbb_records), encoding="utf-8")
            entries.append(
                ManifestEntry(
                    source=stem,
                    output=out_stem,
                    phi_degrees=phi,
                    canvas=(rotated_img.width, rotated_img.height),
                    annotations=len(rotated_recs),
                )
            )
        return entries

    if workers == 1:
        grouped = [job(stem) for stem in stems]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            grouped = list(pool.map(job, stems))
    manifest = DatasetManifest(
        seed=seed,
        angle_range=(lo, hi),
        multiplicity=multiplicity,
        split=split,
        tool_version=__version__,
        entries=tuple(e for group in grouped for e in group),
        skipped=tuple(skipped),
    )
    (out / "manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    return manifest


def evaluate_run(
    predictions_file,
    gt_dir,
    configs: list[EvalConfig],
    json_path=None,
) -> EvalReport:
    """Score a predictions file against a directory of annotation files.

    Ground-truth image ids are the annotation file stems. Predicted ids
    with no matching file are scored against zero ground truths (pure
    false positives) and reported in the warnings.
    """
    predictions_file = Path(predictions_file)
    gt_root = Path(gt_dir)
    if not gt_root.is_dir():
        raise FileNotFoundError(f"no such directory: {gt_root}")
    pairs = parse_predictions(predictions_file.read_text(encoding="utf-8"))
    detections: dict[str, list] = {}
    for image_id, det in pairs:
        detections.setdefault(image_id, []).append(det)
    ground_truths = {}
    for p in sorted(gt_root.glob("*.txt")):
        try:
            ground_truths[p.stem] = parse_dota_file(p.read_text(encoding="utf-8"))
        except ParseError as exc:
            raise ParseError(f"{exc}", path=p.name) from exc
    missing = sorted(set(detections) - set(ground_truths))
    warnings = tuple(
        f"no ground truth for image id {image_id!r}; its detections count as false positives"
        for image_id in missing
    )
    report = evaluate(detections, ground_truths, configs)
    report = replace(report, warnings=warnings)
    if json_path is not None:
        Path(json_path).write_text(report.to_json(), encoding="utf-8")
    return report
