"""Command-line entry points: convert, rotate, validate, eval, render."""

from __future__ import annotations

import argparse
import base64
import json
import sys
from pathlib import Path
from xml.sax.saxutils import escape

from PIL import Image

from .errors import ParseError, ValidationError
from .formats import parse_dota_file, parse_predictions, validate_annotations
from .metrics import PRESETS, EvalConfig
from .pipeline import convert_dataset, evaluate_run, generate_rotated_dataset
from .transform import RasterImage


def _range_type(value: str) -> tuple[float, float]:
    try:
        lo_text, hi_text = value.split(":")
        lo, hi = float(lo_text), float(hi_text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <lo>:<hi>, got {value!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty range {value!r}")
    return lo, hi


def _fill_type(value: str) -> tuple[int, ...]:
    try:
        parts = tuple(int(p) for p in value.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected r,g,b or a single value, got {value!r}") from None
    if len(parts) not in (1, 3) or any(not 0 <= p <= 255 for p in parts):
        raise argparse.ArgumentTypeError(f"fill values must be 8-bit, got {value!r}")
    return parts


def _seed_type(value: str) -> int:
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {value!r}") from None
    if not 0 <= seed < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return seed


def _normalize_argv(argv: list[str]) -> list[str]:
    # let "--range -180:180" through; argparse would read the value as a flag
    out = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok == "--range" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"--range={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _num(v: float) -> str:
    return f"{v:.3f}"


def render_overlay_svg(
    image_path,
    records,
    head_color: str = "#d62728",
    tail_color: str = "#1f77b4",
    stroke_width: float = 2.0,
) -> str:
    """SVG with the raster embedded and one overlay per (quad, label, score).

    The head edge A->B gets the head stroke, the tail edge D->C the tail
    stroke, corner A a filled marker. score may be None (ground truth).
    Output is deterministic byte for byte for equal inputs.
    """
    image_path = Path(image_path)
    data = image_path.read_bytes()
    with Image.open(image_path) as im:
        width, height = im.size
        fmt = (im.format or "PNG").lower()
    mime = "image/jpeg" if fmt in ("jpeg", "jpg") else "image/png"
    encoded = base64.b64encode(data).decode("ascii")
    sw = _num(stroke_width)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<image href="data:{mime};base64,{encoded}" x="0" y="0" '
        f'width="{width}" height="{height}"/>',
    ]
    for quad, label, score in records:
        a, b, c, d = quad.corners
        ring = " ".join(f"{_num(x)},{_num(y)}" for x, y in quad.corners)
        parts.append(
            f'<polygon points="{ring}" fill="none" stroke="#888888" '
            f'stroke-width="{sw}" stroke-opacity="0.6"/>'
        )
        parts.append(
            f'<line x1="{_num(a[0])}" y1="{_num(a[1])}" x2="{_num(b[0])}" y2="{_num(b[1])}" '
            f'stroke="{head_color}" stroke-width="{sw}"/>'
        )
        parts.append(
            f'<line x1="{_num(d[0])}" y1="{_num(d[1])}" x2="{_num(c[0])}" y2="{_num(c[1])}" '
            f'stroke="{tail_color}" stroke-width="{sw}"/>'
        )
        parts.append(
            f'<circle cx="{_num(a[0])}" cy="{_num(a[1])}" r="{_num(stroke_width * 2.0)}" '
            f'fill="{head_color}"/>'
        )
        if score is not None:
            parts.append(
                f'<text x="{_num(a[0] + 3.0)}" y="{_num(a[1] - 4.0)}" font-size="12" '
                f'font-family="sans-serif" fill="{head_color}">{escape(label)} {score:.2f}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _cmd_convert(args) -> int:
    stats = convert_dataset(args.icdar, args.out, corrections_file=args.corrections)
    print(f"converted {stats.images} images, {stats.instances} instances -> {args.out}")
    return 0


def _cmd_rotate(args) -> int:
    fill = args.fill if len(args.fill) > 1 else args.fill[0]
    manifest = generate_rotated_dataset(
        args.images,
        args.ann,
        args.out,
        seed=args.seed,
        angle_range=args.range,
        multiplicity=args.multiplicity,
        fill=fill,
        split=args.split,
        workers=args.workers,
    )
    print(
        f"rotated {len(manifest.entries)} outputs from "
        f"{len({e.source for e in manifest.entries})} images "
        f"({len(manifest.skipped)} skipped) -> {args.out}"
    )
    return 0


def _iter_annotation_files(path: Path):
    if path.is_dir():
        yield from sorted(path.glob("*.txt"))
    else:
        yield path


def _cmd_validate(args) -> int:
    root = Path(args.ann)
    if not root.exists():
        print(f"error: no such path: {root}", file=sys.stderr)
        return 2
    images_dir = Path(args.images) if args.images else None
    total_issues = 0
    machine: dict[str, list[dict]] = {}
    for ann_path in _iter_annotation_files(root):
        records = parse_dota_file(ann_path.read_text(encoding="utf-8"))
        canvas = None
        if images_dir is not None:
            for ext in (".png", ".jpg", ".jpeg"):
                candidate = images_dir / f"{ann_path.stem}{ext}"
                if candidate.exists():
                    with Image.open(candidate) as im:
                        canvas = im.size
                    break
        report = validate_annotations(records, canvas=canvas)
        issues = list(report.issues())
        total_issues += len(issues)
        for f in issues:
            print(f"{ann_path.name}[{f.record_index}]: {f.code} {f.detail}")
        machine[ann_path.name] = [
            {"record": f.record_index, "code": f.code, "detail": f.detail} for f in issues
        ]
    if args.json:
        Path(args.json).write_text(
            json.dumps({"issues": machine}, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    if total_issues:
        print(f"{total_issues} issue(s) found", file=sys.stderr)
        return 1
    print("all records ok")
    return 0


def _cmd_eval(args) -> int:
    configs: list[EvalConfig] = []
    for preset in args.preset or []:
        configs.append(PRESETS[preset])
    if args.iou is not None or args.angle is not None:
        if args.iou is None or args.angle is None:
            print("error: --iou and --angle must be given together", file=sys.stderr)
            return 2
        configs.append(EvalConfig(args.iou, args.angle))
    if not configs:
        configs = list(PRESETS.values())
    report = evaluate_run(args.pred, args.gt, configs, json_path=args.json)
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    for r in report.results:
        print(f"{r.config.name}  AP {r.ap:.3f}  (TP {r.tp} FP {r.fp} FN {r.fn})")
    return 0


def _cmd_render(args) -> int:
    image_path = Path(args.image)
    if not image_path.exists():
        print(f"error: no such image: {image_path}", file=sys.stderr)
        return 2
    records = []
    if args.ann:
        ann_path = Path(args.ann)
        if not ann_path.exists():
            print(f"error: no such file: {ann_path}", file=sys.stderr)
            return 2
        for rec in parse_dota_file(ann_path.read_text(encoding="utf-8")):
            records.append((rec.quad, rec.label, None))
    else:
        pred_path = Path(args.pred)
        if not pred_path.exists():
            print(f"error: no such file: {pred_path}", file=sys.stderr)
            return 2
        image_id = args.image_id or image_path.stem
        for rec_id, det in parse_predictions(pred_path.read_text(encoding="utf-8")):
            if rec_id == image_id:
                records.append((det.quad, det.label, det.score))
    svg = render_overlay_svg(
        image_path,
        records,
        head_color=args.head_color,
        tail_color=args.tail_color,
        stroke_width=args.stroke_width,
    )
    Path(args.out).write_text(svg, encoding="utf-8")
    print(f"rendered {len(records)} box(es) -> {args.out}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="r360",
        description="360-degree oriented table boxes: dataset tools and evaluation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert region XML files to annotation text files")
    p.add_argument("--icdar", required=True, help="directory of per-image XML files")
    p.add_argument("--out", required=True, help="output directory for .txt files")
    p.add_argument("--corrections", help="sidecar of explicit corner shifts: image_id index k")
    p.set_defaults(handler=_cmd_convert)

    p = sub.add_parser("rotate", help="generate a randomly rotated copy of a dataset")
    p.add_argument("--images", required=True, help="directory of source images")
    p.add_argument("--ann", required=True, help="directory of matching annotation .txt files")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--seed", type=_seed_type, required=True, help="global seed (u64)")
    p.add_argument("--range", type=_range_type, default=(-180.0, 180.0), help="angle range <lo>:<hi> in degrees")
    p.add_argument("--fill", type=_fill_type, default=(255, 255, 255), help="canvas fill r,g,b")
    p.add_argument("--multiplicity", type=int, default=1, help="rotated copies per source image")
    p.add_argument("--split", help="split name for the annotation folders (ann_<split>_obbox)")
    p.add_argument("--workers", type=int, default=1, help="parallel image workers")
    p.set_defaults(handler=_cmd_rotate)

    p = sub.add_parser("validate", help="geometric checks over annotation files")
    p.add_argument("--ann", required=True, help="annotation .txt file or directory")
    p.add_argument("--images", help="image directory for bounds checks")
    p.add_argument("--json", help="write a machine-readable report here")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("--pred", required=True, help="predictions file")
    p.add_argument("--gt", required=True, help="ground-truth annotation directory")
    p.add_argument("--preset", action="append", choices=sorted(PRESETS), help="named config, repeatable")
    p.add_argument("--iou", type=float, help="custom IoU threshold in (0, 1)")
    p.add_argument("--angle", type=float, help="custom angle threshold in degrees (0, 360]")
    p.add_argument("--json", help="write the full report as JSON here")
    p.set_defaults(handler=_cmd_eval)

    p = sub.add_parser("render", help="render an SVG overlay of boxes on an image")
    p.add_argument("--image", required=True, help="raster image (PNG or JPEG)")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--ann", help="annotation .txt file")
    group.add_argument("--pred", help="predictions file (filtered to --image-id)")
    p.add_argument("--image-id", help="image id to select from --pred (default: image stem)")
    p.add_argument("--out", required=True, help="output .svg path")
    p.add_argument("--head-color", default="#d62728")
    p.add_argument("--tail-color", default="#1f77b4")
    p.add_argument("--stroke-width", type=float, default=2.0)
    p.set_defaults(handler=_cmd_render)

    return parser


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    args = _build_parser().parse_args(_normalize_argv(list(argv)))
    try:
        return args.handler(args)
    except (ParseError, ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
