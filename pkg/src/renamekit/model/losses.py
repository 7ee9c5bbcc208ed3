"""Best-candidate selection and the mask + classification loss.

For each segment, every candidate name of its class (plus one appended
negative name from a different class) produced a mask and class prediction.
The query whose thresholded mask overlaps the ground truth best (highest
IoU) is selected; if it is a positive candidate it is supervised toward the
ground-truth mask and class, and if the negative wins it is supervised
toward the empty mask and the void class.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import DataError

_EPS = 1e-12


@dataclass
class LossWeights:
    bce: float = 5.0
    dice: float = 5.0
    cls: float = 2.0


def binary_cross_entropy(probs: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean BCE on probabilities (predictions are already sigmoided).

    Computed in float64: saturated float32 probabilities (exactly 0 or 1)
    would otherwise send log(1 - p) to -inf on confidently wrong pixels.
    """
    p = probs.double().clamp(_EPS, 1.0 - _EPS)
    t = target.double()
    return -(torch.xlogy(t, p) + torch.xlogy(1.0 - t, 1.0 - p)).mean()


def dice_loss(probs: torch.Tensor, target: torch.Tensor, smooth: float = 1.0) -> torch.Tensor:
    probs = probs.double()
    target = target.double()
    inter = (probs * target).sum()
    return 1.0 - (2.0 * inter + smooth) / (probs.sum() + target.sum() + smooth)


def threshold_iou(mask_probs: torch.Tensor, gt_mask: torch.Tensor, threshold: float = 0.5) -> float:
    pred = mask_probs.detach() > threshold
    gt = gt_mask.detach() > 0.5
    inter = (pred & gt).sum().item()
    union = (pred | gt).sum().item()
    return inter / union if union > 0 else 0.0


def compute_segment_loss(
    mask_probs: torch.Tensor,    # [n, H, W], this segment's queries only
    class_probs: torch.Tensor,   # [n, K+1]
    gt_mask: torch.Tensor,       # [H, W], {0, 1}
    gt_class: int,
    is_negative: list[bool],
    void_index: int,
    weights: LossWeights = LossWeights(),
    mask_threshold: float = 0.5,
) -> tuple[torch.Tensor, int]:
    """Loss for one segment and the index of the selected query.

    Ties (e.g. every candidate at IoU 0) resolve toward the lowest query
    index, so selection is deterministic.
    """
    n = mask_probs.shape[0]
    if n == 0 or len(is_negative) != n:
        raise DataError("query/flag count mismatch in loss computation")
    if not any(not neg for neg in is_negative) or sum(is_negative) != 1:
        raise DataError("each segment needs >= 1 positive candidate and exactly 1 negative")
    ious = np.array([
        threshold_iou(mask_probs[i], gt_mask, mask_threshold) for i in range(n)
    ])
    best = int(np.argmax(ious))
    if is_negative[best]:
        target_mask = torch.zeros_like(gt_mask)
        target_class = void_index
    else:
        target_mask = gt_mask
        target_class = gt_class
    mask_term = weights.bce * binary_cross_entropy(
        mask_probs[best], target_mask
    ) + weights.dice * dice_loss(mask_probs[best], target_mask)
    class_term = weights.cls * -torch.log(
        class_probs[best, target_class].double().clamp(min=_EPS)
    )
    return mask_term + class_term, best


@dataclass
class QueryBatch:
    """Bookkeeping for one image's queries.

    Queries are grouped per segment: all candidate names of the segment's
    class followed by exactly one negative name drawn from a different
    class.
    """

    embeddings: torch.Tensor                      # [N, C]
    names: list[str] = field(default_factory=list)
    segment_ids: list[int] = field(default_factory=list)     # per query
    is_negative: list[bool] = field(default_factory=list)    # per query
    gt_masks: dict[int, torch.Tensor] = field(default_factory=dict)
    gt_classes: dict[int, int] = field(default_factory=dict)    # class index (0..K-1)

    def query_indices(self, segment_id: int) -> list[int]:
        return [i for i, s in enumerate(self.segment_ids) if s == segment_id]

    def bias_stack(self) -> torch.Tensor:
        return torch.stack([self.gt_masks[s] > 0.5 for s in self.segment_ids])


def compute_batch_loss(
    output_mask_probs: torch.Tensor,
    output_class_probs: torch.Tensor,
    batch: QueryBatch,
    void_index: int,
    weights: LossWeights = LossWeights(),
    mask_threshold: float = 0.5,
) -> tuple[torch.Tensor, dict[int, int]]:
    """Mean segment loss over one image; also returns best query per segment."""
    losses = []
    best_by_segment: dict[int, int] = {}
    for segment_id in sorted(batch.gt_masks):
        idx = batch.query_indices(segment_id)
        loss, best = compute_segment_loss(
            output_mask_probs[idx],
            output_class_probs[idx],
            batch.gt_masks[segment_id],
            batch.gt_classes[segment_id],
            [batch.is_negative[i] for i in idx],
            void_index,
            weights,
            mask_threshold,
        )
        losses.append(loss)
        best_by_segment[segment_id] = idx[best]
    if not losses:
        raise DataError("image contributed no segments to the loss")
    return torch.stack(losses).mean(), best_by_segment
