from .instances import APResult, instance_ap
from .matching import EvalSegment, MatchedPair, MatchSet, mask_iou, match_segments
from .panoptic import ClassCounts, PanopticResult, panoptic_quality
from .report import (
    EvalReport,
    NameGrouping,
    evaluate_merged,
    evaluate_segments,
    evaluate_semantic,
    per_name_report,
    render_table,
)
from .semantic import SemanticResult, semantic_miou

__all__ = [
    "APResult",
    "ClassCounts",
    "EvalReport",
    "EvalSegment",
    "MatchSet",
    "MatchedPair",
    "NameGrouping",
    "PanopticResult",
    "SemanticResult",
    "evaluate_merged",
    "evaluate_segments",
    "evaluate_semantic",
    "instance_ap",
    "mask_iou",
    "match_segments",
    "panoptic_quality",
    "per_name_report",
    "render_table",
    "semantic_miou",
]
