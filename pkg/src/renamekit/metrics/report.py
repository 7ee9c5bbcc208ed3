"""Evaluation reports, merged-vocabulary and class-grouped protocols.

Models trained with different name sets are compared by merging their
vocabularies into one prompt set at inference time and, for scoring,
collapsing every predicted name back onto the original class division.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError
from ..names.vectors import SimilarityFn
from ..store.types import ClassTable
from .instances import instance_ap
from .matching import EvalSegment, MatchSet, match_segments
from .panoptic import panoptic_quality
from .semantic import semantic_miou

PROTOCOLS = ("plain", "merged_names", "grouped_to_original")


@dataclass
class EvalReport:
    mode: str
    protocol: str
    pq: float = math.nan
    sq: float = math.nan
    rq: float = math.nan
    ap: float = math.nan
    miou: float = math.nan
    per_class: dict[str, dict[str, float]] = field(default_factory=dict)
    defined: bool = True

    def to_json(self) -> dict:
        def clean(x: float) -> float | None:
            return None if math.isnan(x) else x

        return {
            "mode": self.mode,
            "protocol": self.protocol,
            "defined": self.defined,
            "pq": clean(self.pq),
            "sq": clean(self.sq),
            "rq": clean(self.rq),
            "ap": clean(self.ap),
            "miou": clean(self.miou),
            "per_class": self.per_class,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True))


class NameGrouping:
    """Union of name sets with a unique name -> original class mapping."""

    def __init__(self, name_sets: list[dict[int, list[str]]], table: ClassTable):
        self.table = table
        self.name_to_class: dict[str, int] = {}
        conflicts: dict[str, set[int]] = {}
        for name_set in name_sets:
            for class_id, names in name_set.items():
                for name in names:
                    owner = self.name_to_class.get(name)
                    if owner is None:
                        self.name_to_class[name] = class_id
                    elif owner != class_id:
                        conflicts.setdefault(name, {owner}).add(class_id)
        if conflicts:
            listing = "; ".join(
                f"{name!r} claimed by classes {sorted(ids)}"
                for name, ids in sorted(conflicts.items())
            )
            raise ConfigurationError(f"conflicting name-to-class mappings: {listing}")

    @property
    def vocabulary(self) -> list[str]:
        return sorted(self.name_to_class)

    def class_label(self, class_id: int) -> str:
        return self.table[class_id].primary_name

    def collapse(self, name: str) -> str:
        """Map a fine-grained predicted name onto its original class label."""
        if name not in self.name_to_class:
            raise ConfigurationError(f"predicted name {name!r} not in any merged name set")
        return self.class_label(self.name_to_class[name])

    def collapse_segments(self, segments: list[EvalSegment]) -> list[EvalSegment]:
        return [
            EvalSegment(
                segment_id=s.segment_id,
                label=self.collapse(s.label),
                mask=s.mask,
                score=s.score,
                image_id=s.image_id,
            )
            for s in segments
        ]


def evaluate_segments(
    gt_by_image: dict[str, list[EvalSegment]],
    pred_by_image: dict[str, list[EvalSegment]],
    mode: str = "standard",
    similarity: SimilarityFn | None = None,
    protocol: str = "plain",
    with_ap: bool = True,
    thing_labels: set[str] | None = None,
) -> EvalReport:
    """Panoptic quality plus instance AP over per-image segment lists."""
    match = MatchSet()
    for image_id in sorted(set(gt_by_image) | set(pred_by_image)):
        match.extend(
            match_segments(
                gt_by_image.get(image_id, []), pred_by_image.get(image_id, []), mode
            )
        )
    pq = panoptic_quality(match, mode, similarity)
    report = EvalReport(
        mode=mode, protocol=protocol, pq=pq.pq, sq=pq.sq, rq=pq.rq, defined=pq.defined
    )
    for label, counts in sorted(pq.per_class.items()):
        report.per_class[label] = {
            "pq": counts.pq,
            "sq": counts.sq,
            "rq": counts.rq,
        }
    if with_ap:
        def things_only(by_image):
            return {
                img: [s for s in segs if thing_labels is None or s.label in thing_labels]
                for img, segs in by_image.items()
            }

        ap = instance_ap(things_only(gt_by_image), things_only(pred_by_image), mode, similarity)
        report.ap = ap.ap
        for label, value in ap.per_class.items():
            report.per_class.setdefault(label, {})["ap"] = value
    return report


def evaluate_semantic(
    gt_maps: list[np.ndarray],
    pred_maps: list[np.ndarray],
    mode: str = "standard",
    similarity: SimilarityFn | None = None,
    labels: list[str] | None = None,
    protocol: str = "plain",
) -> EvalReport:
    result = semantic_miou(gt_maps, pred_maps, mode, similarity, labels)
    report = EvalReport(
        mode=mode, protocol=protocol, miou=result.miou, defined=result.defined
    )
    for label, iou in sorted(result.per_class.items()):
        report.per_class[label] = {"iou": iou}
    return report


def evaluate_merged(
    gt_by_image: dict[str, list[EvalSegment]],
    pred_by_image: dict[str, list[EvalSegment]],
    name_sets: list[dict[int, list[str]]],
    table: ClassTable,
    mode: str = "standard",
    similarity: SimilarityFn | None = None,
    with_ap: bool = True,
) -> EvalReport:
    """Score fine-grained predictions on the original class division.

    Ground-truth segments must be labeled with original class labels
    (``table`` primary names). Predicted labels may be any name in the
    merged vocabulary; each collapses to its original class before counting.
    """
    grouping = NameGrouping(name_sets, table)
    pred_collapsed = {
        image_id: grouping.collapse_segments(segs)
        for image_id, segs in pred_by_image.items()
    }
    thing_labels = {
        table[cid].primary_name for cid in table.ids() if table[cid].is_thing
    }
    return evaluate_segments(
        gt_by_image,
        pred_collapsed,
        mode=mode,
        similarity=similarity,
        protocol="grouped_to_original",
        with_ap=with_ap,
        thing_labels=thing_labels,
    )


def per_name_report(
    report: EvalReport, k: int, metric: str = "iou"
) -> tuple[list[tuple[str, float]], list[tuple[str, float]]]:
    """Top-k and bottom-k class names by a per-class metric value.

    Ties break lexicographically; k is clipped to the class count.
    """
    if k < 0:
        raise ConfigurationError(f"k must be >= 0, got {k}")
    rows = [
        (name, values[metric])
        for name, values in report.per_class.items()
        if metric in values
    ]
    k = min(k, len(rows))
    top = sorted(rows, key=lambda r: (-r[1], r[0]))[:k]
    bottom = sorted(rows, key=lambda r: (r[1], r[0]))[:k]
    return top, bottom


def render_table(report: EvalReport) -> str:
    """Human-readable summary table."""
    def fmt(x: float) -> str:
        return "undef" if math.isnan(x) else f"{100 * x:6.2f}"

    lines = [
        f"mode: {report.mode}    protocol: {report.protocol}",
        f"{'metric':<8}{'value':>8}",
        f"{'PQ':<8}{fmt(report.pq):>8}",
        f"{'SQ':<8}{fmt(report.sq):>8}",
        f"{'RQ':<8}{fmt(report.rq):>8}",
        f"{'AP':<8}{fmt(report.ap):>8}",
        f"{'mIoU':<8}{fmt(report.miou):>8}",
    ]
    return "\n".join(lines)
