"""Pixel-level mean IoU with hard or similarity-weighted counts.

Every pixel contributes one (gt label, predicted label) event. For labels
(c_i, c_j) with similarity S:

    TP[c_i] += S,  FN[c_i] += 1 - S,  FP[c_j] += 1 - S

IoU_c = TP_c / (TP_c + FP_c + FN_c); mIoU averages over classes present in
either map. Standard mode is the indicator-similarity special case.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, DataError
from ..names.vectors import IndicatorSimilarity, SimilarityFn


@dataclass
class SemanticResult:
    miou: float
    per_class: dict[str, float] = field(default_factory=dict)
    defined: bool = True


def _pair_counts(gt: np.ndarray, pred: np.ndarray) -> dict[tuple[int, int], int]:
    if gt.shape != pred.shape:
        raise DataError(f"label map shapes differ: {gt.shape} vs {pred.shape}")
    stacked = np.stack([gt.ravel(), pred.ravel()], axis=1)
    uniq, counts = np.unique(stacked, axis=0, return_counts=True)
    return {(int(i), int(j)): int(c) for (i, j), c in zip(uniq, counts)}


def semantic_miou(
    gt: np.ndarray | list[np.ndarray],
    pred: np.ndarray | list[np.ndarray],
    mode: str = "standard",
    similarity: SimilarityFn | None = None,
    labels: list[str] | None = None,
) -> SemanticResult:
    """mIoU over one map pair or a list of pairs.

    ``labels`` maps integer class ids to names; it is required in open mode
    (similarity is defined on names) and otherwise only affects report keys.
    """
    if mode == "open":
        if similarity is None:
            raise ConfigurationError("open mode requires a similarity provider")
        if labels is None:
            raise ConfigurationError("open mode requires the id -> name label list")
    elif mode == "standard":
        similarity = IndicatorSimilarity()
    else:
        raise ConfigurationError(f"unknown metric mode: {mode}")

    gt_maps = gt if isinstance(gt, list) else [gt]
    pred_maps = pred if isinstance(pred, list) else [pred]
    if len(gt_maps) != len(pred_maps):
        raise DataError("gt and pred map lists differ in length")

    def name_of(class_id: int) -> str:
        if labels is not None:
            return labels[class_id]
        return str(class_id)

    tp: dict[str, float] = defaultdict(float)
    fp: dict[str, float] = defaultdict(float)
    fn: dict[str, float] = defaultdict(float)
    present: set[str] = set()
    for g, p in zip(gt_maps, pred_maps):
        for (ci, cj), count in _pair_counts(np.asarray(g), np.asarray(p)).items():
            ni, nj = name_of(ci), name_of(cj)
            present.add(ni)
            present.add(nj)
            s = similarity.similarity(ni, nj)
            tp[ni] += s * count
            fn[ni] += (1.0 - s) * count
            fp[nj] += (1.0 - s) * count

    if not present:
        return SemanticResult(miou=math.nan, defined=False)
    per_class: dict[str, float] = {}
    for name in sorted(present):
        denom = tp[name] + fp[name] + fn[name]
        if denom > 0:
            per_class[name] = tp[name] / denom
    if not per_class:
        return SemanticResult(miou=math.nan, defined=False)
    return SemanticResult(
        miou=sum(per_class.values()) / len(per_class), per_class=per_class
    )
