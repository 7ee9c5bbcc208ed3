"""Panoptic quality with hard or similarity-weighted counts.

For a matched pair with ground-truth label c_i and predicted label c_j:

    TP[c_i] += S(c_i, c_j)      weighted-IoU[c_i] += S(c_i, c_j) * iou
    FN[c_i] += 1 - S(c_i, c_j)
    FP[c_j] += 1 - S(c_i, c_j)

Standard mode uses the name-equality indicator for S (pairs then always
agree on labels, so the counts are the classical integers). Unmatched
segments contribute hard counts in both modes. Per class:

    RQ = TP / (TP + FP/2 + FN/2),  SQ = weighted-IoU / TP,  PQ = SQ * RQ

and aggregates average over classes present in ground truth or predictions.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from ..errors import ConfigurationError
from ..names.vectors import IndicatorSimilarity, SimilarityFn
from .matching import MatchSet


@dataclass
class ClassCounts:
    tp: float = 0.0
    fp: float = 0.0
    fn: float = 0.0
    weighted_iou: float = 0.0

    @property
    def present(self) -> bool:
        return (self.tp + self.fp + self.fn) > 0

    @property
    def rq(self) -> float:
        denom = self.tp + 0.5 * self.fp + 0.5 * self.fn
        return self.tp / denom if denom > 0 else 0.0

    @property
    def sq(self) -> float:
        return self.weighted_iou / self.tp if self.tp > 0 else 0.0

    @property
    def pq(self) -> float:
        return self.sq * self.rq


@dataclass
class PanopticResult:
    pq: float
    sq: float
    rq: float
    per_class: dict[str, ClassCounts] = field(default_factory=dict)
    defined: bool = True


def accumulate_counts(
    match: MatchSet, similarity: SimilarityFn
) -> dict[str, ClassCounts]:
    counts: dict[str, ClassCounts] = defaultdict(ClassCounts)
    for pair in match.matched:
        s = similarity.similarity(pair.gt.label, pair.pred.label)
        counts[pair.gt.label].tp += s
        counts[pair.gt.label].weighted_iou += s * pair.iou
        counts[pair.gt.label].fn += 1.0 - s
        counts[pair.pred.label].fp += 1.0 - s
    for g in match.unmatched_gt:
        counts[g.label].fn += 1.0
    for p in match.unmatched_pred:
        counts[p.label].fp += 1.0
    return dict(counts)


def panoptic_quality(
    match: MatchSet, mode: str = "standard", similarity: SimilarityFn | None = None
) -> PanopticResult:
    """Aggregate PQ/SQ/RQ over a (possibly multi-image) match set."""
    if mode == "open":
        if similarity is None:
            raise ConfigurationError("open mode requires a similarity provider")
    elif mode == "standard":
        similarity = IndicatorSimilarity()
    else:
        raise ConfigurationError(f"unknown metric mode: {mode}")
    if not match.matched and not match.unmatched_gt:
        # No ground truth at all: quality is undefined, not zero.
        return PanopticResult(
            pq=math.nan, sq=math.nan, rq=math.nan,
            per_class=accumulate_counts(match, similarity), defined=False,
        )
    per_class = accumulate_counts(match, similarity)
    present = [c for c in per_class.values() if c.present]
    n = len(present)
    return PanopticResult(
        pq=sum(c.pq for c in present) / n,
        sq=sum(c.sq for c in present) / n,
        rq=sum(c.rq for c in present) / n,
        per_class=per_class,
    )
