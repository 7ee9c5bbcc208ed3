"""Segment matching for panoptic-style evaluation.

Standard mode matches ground truth and predictions of the same label at
mask IoU > 0.5 (such a partner is provably unique). Open mode drops the
label constraint and matches greedily by descending mask IoU with the same
0.5 floor, so that pairs with differing labels can carry soft counts.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError


@dataclass
class EvalSegment:
    segment_id: int
    label: str
    mask: np.ndarray  # bool, H x W
    score: float | None = None  # confidence; used by instance AP
    image_id: str = ""


@dataclass
class MatchedPair:
    gt: EvalSegment
    pred: EvalSegment
    iou: float


@dataclass
class MatchSet:
    matched: list[MatchedPair] = field(default_factory=list)
    unmatched_gt: list[EvalSegment] = field(default_factory=list)
    unmatched_pred: list[EvalSegment] = field(default_factory=list)

    def extend(self, other: "MatchSet") -> None:
        self.matched.extend(other.matched)
        self.unmatched_gt.extend(other.unmatched_gt)
        self.unmatched_pred.extend(other.unmatched_pred)


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    inter = np.count_nonzero(a & b)
    if inter == 0:
        return 0.0
    union = np.count_nonzero(a | b)
    return inter / union


def _check_no_overlap(segments: list[EvalSegment], side: str) -> None:
    if not segments:
        return
    cover = np.zeros(segments[0].mask.shape, dtype=np.int32)
    for seg in segments:
        cover += seg.mask.astype(np.int32)
    if cover.max(initial=0) > 1:
        raise DataError(f"overlapping {side} segments in panoptic input")


def match_segments(
    gt: list[EvalSegment], pred: list[EvalSegment], mode: str = "standard"
) -> MatchSet:
    """Match one image's segments. See module docstring for the two modes."""
    if mode not in ("standard", "open"):
        raise DataError(f"unknown metric mode: {mode}")
    _check_no_overlap(gt, "ground-truth")
    result = MatchSet()
    pairs = []
    for gi, g in enumerate(gt):
        for pi, p in enumerate(pred):
            if mode == "standard" and g.label != p.label:
                continue
            iou = mask_iou(g.mask, p.mask)
            if iou > 0.5:
                pairs.append((iou, gi, pi))
    pairs.sort(key=lambda t: (-t[0], t[1], t[2]))
    used_gt: set[int] = set()
    used_pred: set[int] = set()
    for iou, gi, pi in pairs:
        if gi in used_gt or pi in used_pred:
            continue
        used_gt.add(gi)
        used_pred.add(pi)
        result.matched.append(MatchedPair(gt=gt[gi], pred=pred[pi], iou=iou))
    result.unmatched_gt = [g for i, g in enumerate(gt) if i not in used_gt]
    result.unmatched_pred = [p for i, p in enumerate(pred) if i not in used_pred]
    return result
