import logging
import math

import numpy as np
import pytest
import torch

from renamekit.model.blocks import DecoderBlock, MaskedCrossAttention
from renamekit.model.config import ModelConfig
from renamekit.model.network import (
    FrozenBackbone,
    RenamingModel,
    downsample_bias,
    predict_heads,
    replace_bias,
)


def _randomize(module, seed=0):
    gen = torch.Generator().manual_seed(seed)
    with torch.no_grad():
        for p in module.parameters():
            p.copy_(torch.randn(p.shape, generator=gen) * 0.2)


class TestMaskedCrossAttention:
    def test_full_bias_equals_unmasked(self):
        torch.manual_seed(0)
        attn = MaskedCrossAttention(channels=8, num_heads=2)
        queries = torch.randn(3, 8)
        features = torch.randn(25, 8)
        full = torch.ones(3, 25, dtype=torch.bool)
        out_masked = attn(queries, features, full)
        out_unmasked = attn(queries, features, None)
        assert torch.equal(out_masked, out_unmasked)

    def test_zero_features_leave_queries_unchanged(self):
        torch.manual_seed(1)
        block = DecoderBlock(channels=8, num_heads=2, zero_init_residuals=False)
        _randomize(block, seed=1)
        queries = torch.randn(4, 8)
        features = torch.zeros(16, 8)
        bias = torch.ones(4, 16, dtype=torch.bool)
        # Value/output projections carry no bias term, so attending to zero
        # features adds exactly nothing.
        assert torch.equal(block.cross_attend(queries, features, bias), queries)

    def test_locality_outside_region(self):
        torch.manual_seed(2)
        block = DecoderBlock(channels=8, num_heads=2, zero_init_residuals=False)
        _randomize(block, seed=2)
        queries = torch.randn(2, 8)
        features = torch.randn(36, 8)
        bias = torch.zeros(2, 36, dtype=torch.bool)
        bias[0, :18] = True
        bias[1, 18:] = True
        base = block.cross_attend(queries, features, bias)
        perturbed = features.clone()
        perturbed[18:] += torch.randn(18, 8) * 10  # outside query 0's region
        out = block.cross_attend(queries, perturbed, bias)
        assert (out[0] - base[0]).abs().max().item() < 1e-9
        assert (out[1] - base[1]).abs().max().item() > 1e-3  # its own region changed

    def test_disjoint_swap(self):
        torch.manual_seed(3)
        block = DecoderBlock(channels=8, num_heads=2, zero_init_residuals=False)
        _randomize(block, seed=3)
        queries = torch.randn(2, 8)
        f1 = torch.randn(20, 8)
        f2 = f1.clone()
        f2[10:] = torch.randn(10, 8)  # swap the second region only
        bias = torch.zeros(2, 20, dtype=torch.bool)
        bias[0, :10] = True
        bias[1, 10:] = True
        out1 = block.cross_attend(queries, f1, bias)
        out2 = block.cross_attend(queries, f2, bias)
        assert (out1[0] - out2[0]).abs().max().item() < 1e-9

    def test_empty_region_falls_back_with_warning(self, caplog):
        torch.manual_seed(4)
        attn = MaskedCrossAttention(channels=8, num_heads=2)
        queries = torch.randn(2, 8)
        features = torch.randn(9, 8)
        bias = torch.zeros(2, 9, dtype=torch.bool)
        bias[1, 0] = True
        with caplog.at_level(logging.WARNING, logger="renamekit.model.blocks"):
            out = attn(queries, features, bias)
        assert torch.isfinite(out).all()
        assert any("empty" in r.message for r in caplog.records)
        full = attn(queries, features, torch.ones(2, 9, dtype=torch.bool))
        assert torch.equal(out[0], full[0])  # row 0 fell back to full attention


class TestPredictHeads:
    def test_zero_queries_give_half_masks_uniform_classes(self):
        head = torch.nn.Linear(4, 6)
        with torch.no_grad():
            head.weight.zero_()
            head.bias.zero_()
        queries = torch.zeros(3, 4)
        f_pix = torch.randn(4, 5, 5)
        with torch.no_grad():
            masks, classes = predict_heads(queries, f_pix, head)
        assert torch.equal(masks, torch.full((3, 5, 5), 0.5))
        np.testing.assert_allclose(classes.numpy(), np.full((3, 6), 1 / 6), atol=1e-7)

    def test_hand_computed_single_pixel(self):
        head = torch.nn.Linear(2, 3)
        queries = torch.tensor([[1.0, 2.0]])
        f_pix = torch.tensor([3.0, 4.0]).reshape(2, 1, 1)
        masks, _ = predict_heads(queries, f_pix, head)
        assert math.isclose(masks[0, 0, 0].item(), 1.0 / (1.0 + math.exp(-11.0)), rel_tol=1e-6)

    def test_shapes_and_ranges(self):
        config = ModelConfig(channels=16, num_heads=2, num_blocks=2, num_classes=4,
                             scales=(2, 1))
        torch.manual_seed(0)
        model = RenamingModel(config, backbone=FrozenBackbone(16, seed=0))
        image = torch.rand(3, 16, 16)
        queries = torch.randn(7, 16)
        biases = torch.zeros(7, 16, 16, dtype=torch.bool)
        biases[:, 4:10, 4:10] = True
        out = model(image, queries, biases)
        assert out.mask_probs.shape == (7, 16, 16)
        assert out.class_probs.shape == (7, 5)  # K + 1 incl. void
        assert ((out.mask_probs > 0) & (out.mask_probs < 1)).all()
        sums = out.class_probs.sum(dim=-1)
        assert (sums - 1.0).abs().max().item() < 1e-6

    def test_prediction_is_not_the_bias(self):
        """An adversarial bias pointing at the wrong region must not leak
        through as the predicted mask; predictions come from the queries."""
        config = ModelConfig(channels=16, num_heads=2, num_blocks=1, num_classes=2,
                             scales=(1,))
        torch.manual_seed(1)
        model = RenamingModel(config, backbone=FrozenBackbone(16, seed=1))
        image = torch.rand(3, 12, 12)
        queries = torch.randn(1, 16)
        wrong_bias = torch.zeros(1, 12, 12, dtype=torch.bool)
        wrong_bias[0, 0:3, 0:3] = True
        out = model(image, queries, wrong_bias)
        predicted = (out.mask_probs[0] > 0.5).numpy()
        assert not (predicted == wrong_bias[0].numpy()).all()


class TestReplaceBias:
    def test_p_zero_always_gt(self):
        rng = np.random.default_rng(0)
        gt = np.zeros((4, 4), dtype=bool)
        gt[0, 0] = True
        pred = np.ones((4, 4), dtype=np.float32)
        for _ in range(50):
            assert (replace_bias(gt, pred, 0.0, rng) == gt).all()

    def test_p_one_always_pred(self):
        rng = np.random.default_rng(0)
        gt = np.zeros((4, 4), dtype=bool)
        gt[0, 0] = True
        pred = np.full((4, 4), 0.9, dtype=np.float32)
        for _ in range(50):
            assert replace_bias(gt, pred, 1.0, rng).all()

    def test_monte_carlo_frequency(self):
        rng = np.random.default_rng(7)
        gt = np.zeros((2, 2), dtype=bool)
        gt[0, 0] = True
        pred = np.ones((2, 2), dtype=np.float32)
        hits = sum(
            replace_bias(gt, pred, 0.3, rng).all() for _ in range(10_000)
        )
        assert abs(hits / 10_000 - 0.3) < 0.02

    def test_threshold_on_predicted(self):
        rng = np.random.default_rng(1)
        gt = np.zeros((2, 2), dtype=bool)
        pred = np.array([[0.6, 0.4], [0.5, 0.51]], dtype=np.float32)
        out = replace_bias(gt, pred, 1.0, rng)
        assert (out == (pred > 0.5)).all()

    def test_none_prev_uses_gt(self):
        rng = np.random.default_rng(2)
        gt = np.ones((2, 2), dtype=bool)
        assert (replace_bias(gt, None, 1.0, rng) == gt).all()


def test_downsample_bias_nearest():
    bias = torch.zeros(1, 8, 8, dtype=torch.bool)
    bias[0, 0, 0] = True
    bias[0, 4, 4] = True
    down = downsample_bias(bias, 4)
    assert down.shape == (1, 2, 2)
    assert down[0, 0, 0].item() and down[0, 1, 1].item()
