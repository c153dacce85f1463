"""360-degree oriented table boxes.

Conversions between corner and center-size-angle box forms that keep
the head/tail distinction, adaptively bounded rotation of images with
their annotations, the annotation text/XML formats, and evaluation with
an angle gate on top of rotated IoU.
"""

from .errors import (
    AmbiguityError,
    ContractViolationError,
    DegenerateGeometryError,
    InvalidValueError,
    ParseError,
    ShapeError,
    ValidationError,
)
from .formats import (
    AnnotationRecord,
    DetectionRecord,
    Finding,
    ValidationReport,
    icdar_to_r360,
    parse_corrections,
    parse_dota_file,
    parse_icdar_xml,
    parse_predictions,
    validate_annotations,
    write_dota_file,
)
from .geometry import (
    AngleConvention,
    OrientedBox,
    Point,
    QuadBox,
    angle_difference,
    convert_convention,
    cyclic_shift,
    min_area_rect,
    qbox_to_rbox,
    rbox_to_qbox,
    signed_area,
    wrap_angle,
)
from .metrics import (
    PRESETS,
    ConfigResult,
    EvalConfig,
    EvalReport,
    MatchResult,
    angle_l1_loss,
    average_precision_11pt,
    evaluate,
    match_detections,
    pr_curve,
    riou_loss,
)
from .pipeline import (
    DatasetManifest,
    DatasetStats,
    ManifestEntry,
    convert_dataset,
    evaluate_run,
    generate_rotated_dataset,
)
from .polygon import ConvexPolygon, clip_convex, polygon_area, rotated_iou
from .transform import (
    AffineTransform,
    CanvasSize,
    RasterImage,
    RotationSpec,
    adapt_bounds,
    apply_to_points,
    derive_seed,
    draw_rotation_angle,
    random_rotate,
    rotate_sample,
    rotation_matrix,
    warp_image,
)
from .version import __version__

__all__ = [
    "AmbiguityError",
    "ContractViolationError",
    "DegenerateGeometryError",
    "InvalidValueError",
    "ParseError",
    "ShapeError",
    "ValidationError",
    "AnnotationRecord",
    "DetectionRecord",
    "Finding",
    "ValidationReport",
    "icdar_to_r360",
    "parse_corrections",
    "parse_dota_file",
    "parse_icdar_xml",
    "parse_predictions",
    "validate_annotations",
    "write_dota_file",
    "AngleConvention",
    "OrientedBox",
    "Point",
    "QuadBox",
    "angle_difference",
    "convert_convention",
    "cyclic_shift",
    "min_area_rect",
    "qbox_to_rbox",
    "rbox_to_qbox",
    "signed_area",
    "wrap_angle",
    "PRESETS",
    "ConfigResult",
    "EvalConfig",
    "EvalReport",
    "MatchResult",
    "angle_l1_loss",
    "average_precision_11pt",
    "evaluate",
    "match_detections",
    "pr_curve",
    "riou_loss",
    "DatasetManifest",
    "DatasetStats",
    "ManifestEntry",
    "convert_dataset",
    "evaluate_run",
    "generate_rotated_dataset",
    "ConvexPolygon",
    "clip_convex",
    "polygon_area",
    "rotated_iou",
    "AffineTransform",
    "CanvasSize",
    "RasterImage",
    "RotationSpec",
    "adapt_bounds",
    "apply_to_points",
    "derive_seed",
    "draw_rotation_angle",
    "random_rotate",
    "rotate_sample",
    "rotation_matrix",
    "warp_image",
    "__version__",
]
