"""obbkit: rotated-box geometry, dynamic label assignment, and VOC evaluation.

The package covers the non-learned machinery of a one-anchor oriented
detector: exact rotated IoU via convex clipping, the offset codec used for
anchor refinement, matching-degree sample selection with matching-sensitive
losses, task-split attention forward math, rotated NMS, and PASCAL-style
AP, plus the annotation/tiling plumbing that feeds them.
"""

from .geometry import ConvexPolygon, RotatedBox, convex_intersection, min_area_rect, polygon_area, rotated_iou, to_polygon
from .anchors import BoxOffsets, PyramidLevel, PyramidSpec, decode_offsets, encode_offsets, generate_grid
from .assignment import AssignmentResult, MatchingConfig, assign_labels, matching_degree, matching_degree_matrix, positive_weights
from .attention import AttentionWeights, Task, apply_attention, channel_attention, depression, excitation, fuse_features, load_weights, random_weights, save_weights, spatial_attention
from .evaluation import AnchorQualityStats, ApVariant, DetectionRecord, GroundTruthRecord, MatchOutcome, anchor_quality_stats, average_precision, match_detections, mean_ap, rotated_nms
from .losses import LossConfig, LossReport, classification_loss, combined_loss, focal_loss, regression_loss, smooth_l1
from .dataio import AnchorDumpEntry, DOTA_CLASSES, ImageAnnotation, ParseError, SchemaError, TileWindow, clip_to_window, parse_dota, read_annotations, read_boxes, read_detections, read_dump, tile_windows, untile_detections, write_annotations, write_detections, write_dump
from .tensor import concat_channels, conv2d, fully_connected, global_avg_pool, sigmoid

__version__ = "0.1.0"

__all__ = [
    "RotatedBox", "ConvexPolygon", "to_polygon", "polygon_area",
    "convex_intersection", "rotated_iou", "min_area_rect",
    "PyramidLevel", "PyramidSpec", "BoxOffsets", "generate_grid",
    "encode_offsets", "decode_offsets",
    "MatchingConfig", "AssignmentResult", "matching_degree",
    "matching_degree_matrix", "assign_labels", "positive_weights",
    "AttentionWeights", "Task", "excitation", "depression",
    "channel_attention", "spatial_attention", "fuse_features",
    "apply_attention", "save_weights", "load_weights", "random_weights",
    "LossConfig", "LossReport", "focal_loss", "smooth_l1",
    "classification_loss", "regression_loss", "combined_loss",
    "DetectionRecord", "GroundTruthRecord", "ApVariant", "MatchOutcome",
    "rotated_nms", "match_detections", "average_precision", "mean_ap",
    "AnchorQualityStats", "anchor_quality_stats",
    "ImageAnnotation", "AnchorDumpEntry", "TileWindow", "DOTA_CLASSES",
    "ParseError", "SchemaError", "parse_dota", "tile_windows",
    "clip_to_window", "untile_detections", "read_dump", "write_dump",
    "read_annotations", "write_annotations", "read_detections",
    "write_detections", "read_boxes",
    "conv2d", "global_avg_pool", "fully_connected", "sigmoid", "concat_channels",
    "__version__",
]
