import math

import numpy as np
import pytest
import torch

from renamekit.errors import DataError
from renamekit.model.losses import (
    LossWeights,
    QueryBatch,
    binary_cross_entropy,
    compute_batch_loss,
    compute_segment_loss,
    dice_loss,
    threshold_iou,
)


class TestSegmentLoss:
    def test_perfect_prediction_zero_loss(self):
        gt = torch.tensor([[1.0, 0.0], [1.0, 0.0]])
        mask_probs = torch.stack([gt, torch.zeros(2, 2)])
        class_probs = torch.tensor([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        loss, best = compute_segment_loss(
            mask_probs, class_probs, gt, gt_class=0,
            is_negative=[False, True], void_index=2,
        )
        assert best == 0
        assert loss.item() < 1e-9

    def test_negative_winner_targets_void_and_empty(self):
        gt = torch.tensor([[1.0, 1.0], [0.0, 0.0]])
        # Negative query reconstructs the mask better than the positive.
        mask_probs = torch.stack([
            torch.zeros(2, 2),
            torch.tensor([[0.9, 0.9], [0.1, 0.1]]),
        ])
        class_probs = torch.tensor([[0.5, 0.3, 0.2], [0.1, 0.2, 0.7]])
        weights = LossWeights(bce=1.0, dice=1.0, cls=1.0)
        loss, best = compute_segment_loss(
            mask_probs, class_probs, gt, gt_class=0,
            is_negative=[False, True], void_index=2, weights=weights,
        )
        assert best == 1
        p = mask_probs[1]
        bce = -float(np.mean(np.log(1.0 - p.numpy())))  # target is the empty mask
        dice = 1.0 - 1.0 / (float(p.sum()) + 1.0)
        ce = -math.log(0.7)  # void probability of the winning query
        assert math.isclose(loss.item(), bce + dice + ce, rel_tol=1e-6)

    def test_hand_computed_two_by_two(self):
        gt = torch.tensor([[1.0, 0.0], [1.0, 0.0]], dtype=torch.float64)
        probs = torch.tensor([[0.8, 0.2], [0.6, 0.4]], dtype=torch.float64)
        mask_probs = torch.stack([probs, torch.full((2, 2), 0.01, dtype=torch.float64)])
        class_probs = torch.tensor([[0.7, 0.2, 0.1], [0.3, 0.3, 0.4]], dtype=torch.float64)
        weights = LossWeights(bce=5.0, dice=5.0, cls=2.0)
        loss, best = compute_segment_loss(
            mask_probs, class_probs, gt, gt_class=0,
            is_negative=[False, True], void_index=2, weights=weights,
        )
        assert best == 0
        # Scalar arithmetic, written out term by term.
        bce = -(math.log(0.8) + math.log(1 - 0.2) + math.log(0.6) + math.log(1 - 0.4)) / 4
        dice = 1.0 - (2 * (0.8 + 0.6) + 1.0) / (0.8 + 0.2 + 0.6 + 0.4 + 2.0 + 1.0)
        ce = -math.log(0.7)
        assert math.isclose(loss.item(), 5 * bce + 5 * dice + 2 * ce, rel_tol=1e-9)

    def test_all_zero_iou_tie_breaks_to_lowest_index(self):
        gt = torch.zeros(2, 2)
        gt[0, 0] = 1.0
        mask_probs = torch.full((3, 2, 2), 0.1)
        class_probs = torch.full((3, 3), 1 / 3.0)
        _, best = compute_segment_loss(
            mask_probs, class_probs, gt, gt_class=0,
            is_negative=[False, False, True], void_index=2,
        )
        assert best == 0

    def test_requires_positive_and_single_negative(self):
        gt = torch.ones(2, 2)
        mask_probs = torch.full((2, 2, 2), 0.5)
        class_probs = torch.full((2, 3), 1 / 3.0)
        with pytest.raises(DataError):
            compute_segment_loss(mask_probs, class_probs, gt, 0,
                                 [True, True], void_index=2)
        with pytest.raises(DataError):
            compute_segment_loss(mask_probs, class_probs, gt, 0,
                                 [False, False], void_index=2)


class TestLossParts:
    def test_bce_float32_saturation_stays_finite(self):
        probs = torch.tensor([0.0, 1.0, 0.5])
        target = torch.tensor([1.0, 0.0, 1.0])
        value = binary_cross_entropy(probs, target)
        assert torch.isfinite(value)

    def test_dice_empty_target(self):
        probs = torch.full((2, 2), 0.5)
        assert math.isclose(dice_loss(probs, torch.zeros(2, 2)).item(), 1.0 - 1.0 / 3.0,
                            rel_tol=1e-9)

    def test_threshold_iou(self):
        probs = torch.tensor([[0.9, 0.4], [0.6, 0.1]])
        gt = torch.tensor([[1.0, 0.0], [0.0, 0.0]])
        assert math.isclose(threshold_iou(probs, gt), 0.5, rel_tol=1e-12)

    def test_iou_empty_union(self):
        assert threshold_iou(torch.zeros(2, 2), torch.zeros(2, 2)) == 0.0


class TestBatchLoss:
    def test_mean_over_segments_and_best_map(self):
        gt1 = torch.tensor([[1.0, 0.0], [0.0, 0.0]])
        gt2 = torch.tensor([[0.0, 0.0], [0.0, 1.0]])
        batch = QueryBatch(
            embeddings=torch.zeros(4, 2),
            names=["a", "neg1", "b", "neg2"],
            segment_ids=[10, 10, 11, 11],
            is_negative=[False, True, False, True],
            gt_masks={10: gt1, 11: gt2},
            gt_classes={10: 0, 11: 1},
        )
        mask_probs = torch.stack([gt1, torch.zeros(2, 2), gt2, torch.zeros(2, 2)])
        class_probs = torch.tensor(
            [[1.0, 0.0, 0.0], [0.3, 0.3, 0.4], [0.0, 1.0, 0.0], [0.3, 0.3, 0.4]]
        )
        loss, best = compute_batch_loss(mask_probs, class_probs, batch, void_index=2)
        assert best == {10: 0, 11: 2}
        assert loss.item() < 1e-9
