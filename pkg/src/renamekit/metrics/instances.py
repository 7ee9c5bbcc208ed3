"""Instance-mask average precision over IoU thresholds 0.50:0.05:0.95.

Detections are matched per image, greedily by descending confidence, each
taking the best still-unmatched ground truth with mask IoU >= t. Standard
mode matches within a label; open mode matches label-agnostically, and a
matched detection with ground-truth label c_g and predicted label c_d
contributes S(c_g, c_d) as true positive on c_g's precision-recall curve
and 1 - S as false positive on c_d's curve (so one detection's credit and
penalty sum to one, mirroring the panoptic soft counts). Unmatched
detections are hard false positives of their own label. AP integrates the
precision envelope over recall (all-point interpolation); per-class APs
average over thresholds, and the aggregate averages over labels with at
least one ground-truth instance.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, DataError
from ..names.vectors import IndicatorSimilarity, SimilarityFn
from .matching import EvalSegment, mask_iou

THRESHOLDS = tuple(round(0.5 + 0.05 * i, 2) for i in range(10))


@dataclass
class APResult:
    ap: float
    per_class: dict[str, float] = field(default_factory=dict)
    defined: bool = True


def _match_at_threshold(
    gt: list[EvalSegment], pred: list[EvalSegment], threshold: float, class_agnostic: bool
) -> list[tuple[EvalSegment, EvalSegment | None]]:
    """Greedy per-image matching; returns (detection, matched gt or None)."""
    order = sorted(
        range(len(pred)), key=lambda i: (-(pred[i].score or 0.0), pred[i].segment_id)
    )
    taken: set[int] = set()
    out = []
    for pi in order:
        p = pred[pi]
        best_key, best_gi = None, None
        for gi, g in enumerate(gt):
            if gi in taken:
                continue
            if not class_agnostic and g.label != p.label:
                continue
            iou = mask_iou(g.mask, p.mask)
            if iou < threshold:
                continue
            # Higher IoU wins; on exact ties prefer a same-label partner.
            key = (iou, g.label == p.label)
            if best_key is None or key > best_key:
                best_key, best_gi = key, gi
        if best_gi is not None:
            taken.add(best_gi)
            out.append((p, gt[best_gi]))
        else:
            out.append((p, None))
    return out


def _ap_from_entries(entries: list[tuple[float, float, float]], n_gt: int) -> float:
    """entries: (score, tp weight, fp weight); all-point interpolated AP."""
    if n_gt == 0:
        return math.nan
    if not entries:
        return 0.0
    entries = sorted(entries, key=lambda e: -e[0])
    tp = np.array([e[1] for e in entries])
    fp = np.array([e[2] for e in entries])
    cum_tp = np.cumsum(tp)
    cum_fp = np.cumsum(fp)
    recall = cum_tp / n_gt
    denom = cum_tp + cum_fp
    precision = np.where(denom > 0, cum_tp / np.maximum(denom, 1e-300), 0.0)
    # Precision envelope, then integrate over recall increments.
    for i in range(len(precision) - 2, -1, -1):
        precision[i] = max(precision[i], precision[i + 1])
    ap = 0.0
    prev_recall = 0.0
    for r, p in zip(recall, precision):
        ap += (r - prev_recall) * p
        prev_recall = r
    return float(ap)


def instance_ap(
    gt_by_image: dict[str, list[EvalSegment]],
    pred_by_image: dict[str, list[EvalSegment]],
    mode: str = "standard",
    similarity: SimilarityFn | None = None,
    thresholds: tuple[float, ...] = THRESHOLDS,
) -> APResult:
    """COCO-style mask AP; inputs hold thing-class segments only."""
    if mode == "open":
        if similarity is None:
            raise ConfigurationError("open mode requires a similarity provider")
    elif mode == "standard":
        similarity = IndicatorSimilarity()
    else:
        raise ConfigurationError(f"unknown metric mode: {mode}")
    for image_id, preds in pred_by_image.items():
        for p in preds:
            if p.score is None:
                raise DataError(
                    f"prediction {p.segment_id} (image {image_id}) has no confidence score"
                )

    n_gt: dict[str, int] = defaultdict(int)
    for segs in gt_by_image.values():
        for g in segs:
            n_gt[g.label] += 1
    if not n_gt:
        return APResult(ap=math.nan, defined=False)

    class_agnostic = mode == "open"
    per_class_aps: dict[str, list[float]] = {label: [] for label in n_gt}
    images = sorted(set(gt_by_image) | set(pred_by_image))
    for t in thresholds:
        entries: dict[str, list[tuple[float, float, float]]] = defaultdict(list)
        for image_id in images:
            matches = _match_at_threshold(
                gt_by_image.get(image_id, []),
                pred_by_image.get(image_id, []),
                t,
                class_agnostic,
            )
            for p, g in matches:
                if g is None:
                    entries[p.label].append((p.score, 0.0, 1.0))
                else:
                    s = similarity.similarity(g.label, p.label)
                    entries[g.label].append((p.score, s, 0.0))
                    if 1.0 - s > 0.0:
                        entries[p.label].append((p.score, 0.0, 1.0 - s))
        for label in n_gt:
            per_class_aps[label].append(_ap_from_entries(entries[label], n_gt[label]))
    per_class = {label: float(np.mean(aps)) for label, aps in sorted(per_class_aps.items())}
    return APResult(ap=float(np.mean(list(per_class.values()))), per_class=per_class)
