import math

import numpy as np
import pytest

from renamekit.errors import ConfigurationError, DataError
from renamekit.metrics.instances import THRESHOLDS, instance_ap
from renamekit.metrics.matching import EvalSegment, MatchSet, mask_iou, match_segments
from renamekit.metrics.panoptic import panoptic_quality
from renamekit.metrics.report import (
    EvalReport,
    NameGrouping,
    evaluate_merged,
    evaluate_segments,
    per_name_report,
)
from renamekit.metrics.semantic import semantic_miou
from renamekit.names.vectors import IndicatorSimilarity

from conftest import StubSimilarity, make_class_table
from oracles import naive_standard_miou, naive_standard_pq


def seg(seg_id, label, mask, score=None, image_id="img"):
    return EvalSegment(segment_id=seg_id, label=label,
                       mask=np.asarray(mask, dtype=bool), score=score,
                       image_id=image_id)


def block_mask(h, w, r0, r1, c0, c1):
    m = np.zeros((h, w), dtype=bool)
    m[r0:r1, c0:c1] = True
    return m


class TestMatching:
    def test_identical_prediction_matches_all(self):
        gt = [seg(1, "a", block_mask(8, 8, 0, 4, 0, 4)),
              seg(2, "b", block_mask(8, 8, 4, 8, 4, 8))]
        pred = [seg(11, "a", block_mask(8, 8, 0, 4, 0, 4)),
                seg(12, "b", block_mask(8, 8, 4, 8, 4, 8))]
        result = match_segments(gt, pred, "standard")
        assert len(result.matched) == 2
        assert all(math.isclose(p.iou, 1.0) for p in result.matched)
        assert not result.unmatched_gt and not result.unmatched_pred

    def test_disjoint_masks_match_nothing(self):
        gt = [seg(1, "a", block_mask(8, 8, 0, 2, 0, 2))]
        pred = [seg(2, "a", block_mask(8, 8, 6, 8, 6, 8))]
        result = match_segments(gt, pred, "standard")
        assert not result.matched
        assert len(result.unmatched_gt) == 1 and len(result.unmatched_pred) == 1

    def test_three_segment_fixture_vs_exhaustive(self):
        """Exhaustive-search oracle: the unique IoU > 0.5 pairing."""
        gt = [seg(1, "a", block_mask(8, 8, 0, 4, 0, 8)),
              seg(2, "b", block_mask(8, 8, 4, 8, 0, 4)),
              seg(3, "c", block_mask(8, 8, 4, 8, 4, 8))]
        pred = [seg(11, "a", block_mask(8, 8, 0, 3, 0, 8)),   # IoU 24/32
                seg(12, "b", block_mask(8, 8, 4, 8, 0, 3)),   # IoU 12/16
                seg(13, "c", block_mask(8, 8, 0, 1, 0, 1))]   # tiny, no match
        result = match_segments(gt, pred, "standard")
        expected = set()
        for g in gt:
            for p in pred:
                if g.label == p.label and mask_iou(g.mask, p.mask) > 0.5:
                    expected.add((g.segment_id, p.segment_id))
        got = {(m.gt.segment_id, m.pred.segment_id) for m in result.matched}
        assert got == expected == {(1, 11), (2, 12)}
        assert [s.segment_id for s in result.unmatched_gt] == [3]
        assert [s.segment_id for s in result.unmatched_pred] == [13]

    def test_open_mode_matches_across_labels(self):
        gt = [seg(1, "suv", block_mask(8, 8, 0, 4, 0, 4))]
        pred = [seg(2, "car", block_mask(8, 8, 0, 4, 0, 4))]
        assert not match_segments(gt, pred, "standard").matched
        open_match = match_segments(gt, pred, "open")
        assert len(open_match.matched) == 1

    def test_overlapping_gt_rejected(self):
        gt = [seg(1, "a", block_mask(4, 4, 0, 3, 0, 3)),
              seg(2, "b", block_mask(4, 4, 2, 4, 2, 4))]
        with pytest.raises(DataError, match="overlapping"):
            match_segments(gt, [], "standard")


class TestPanopticQuality:
    def test_perfect_prediction_both_modes(self):
        gt = [seg(1, "a", block_mask(6, 6, 0, 3, 0, 3)),
              seg(2, "b", block_mask(6, 6, 3, 6, 3, 6))]
        pred = [seg(3, "a", block_mask(6, 6, 0, 3, 0, 3)),
                seg(4, "b", block_mask(6, 6, 3, 6, 3, 6))]
        for mode, sim in (("standard", None), ("open", IndicatorSimilarity())):
            match = match_segments(gt, pred, mode)
            result = panoptic_quality(match, mode, sim)
            assert result.pq == result.sq == result.rq == 1.0

    def test_hand_computed_soft_counts(self, stub_similarity):
        # One matched pair: S = 0.8, mask IoU = 0.9, nothing else.
        mask = block_mask(10, 10, 0, 9, 0, 10)
        pred_mask = block_mask(10, 10, 0, 9, 0, 9)  # IoU = 81/90 = 0.9
        gt = [seg(1, "ci", mask)]
        pred = [seg(2, "cj", pred_mask)]
        sim = stub_similarity({("ci", "cj"): 0.8})
        match = match_segments(gt, pred, "open")
        assert math.isclose(match.matched[0].iou, 0.9)
        result = panoptic_quality(match, "open", sim)
        ci, cj = result.per_class["ci"], result.per_class["cj"]
        assert math.isclose(ci.tp, 0.8) and math.isclose(ci.fn, 0.2) and ci.fp == 0
        assert math.isclose(cj.fp, 0.2) and cj.tp == 0 and cj.fn == 0
        # Per-class quality, by hand: SQ = 0.8*0.9/0.8, RQ = 0.8/(0.8 + 0.1)
        assert math.isclose(ci.sq, 0.9)
        assert math.isclose(ci.rq, 0.8 / 0.9)
        assert math.isclose(ci.pq, 0.8)
        assert cj.pq == 0.0
        assert math.isclose(result.pq, 0.4)

    def test_empty_ground_truth_undefined(self):
        pred = [seg(1, "a", block_mask(4, 4, 0, 2, 0, 2))]
        match = match_segments([], pred, "standard")
        result = panoptic_quality(match, "standard")
        assert not result.defined
        assert math.isnan(result.pq)

    def test_conservation_per_matched_pair(self, stub_similarity):
        rng = np.random.default_rng(0)
        sim_value = 0.37
        sim = stub_similarity({("x", "y"): sim_value})
        gt = [seg(1, "x", block_mask(6, 6, 0, 5, 0, 6))]
        pred = [seg(2, "y", block_mask(6, 6, 0, 6, 0, 6))]
        match = match_segments(gt, pred, "open")
        result = panoptic_quality(match, "open", sim)
        pair_tp = result.per_class["x"].tp
        pair_fn = result.per_class["x"].fn
        assert math.isclose(pair_tp + pair_fn, 1.0)
        assert math.isclose(result.per_class["y"].fp, 1.0 - sim_value)

    def test_open_requires_similarity(self):
        with pytest.raises(ConfigurationError):
            panoptic_quality(MatchSet(), "open", None)


class TestSemanticMiou:
    def test_identical_maps(self):
        m = np.array([[1, 1], [2, 2]])
        assert semantic_miou(m, m).miou == 1.0

    def test_two_by_two_hand_case(self, stub_similarity):
        gt = np.array([[0, 0], [0, 1]])
        pred = np.array([[0, 0], [0, 0]])
        sim = stub_similarity({("alpha", "beta"): 0.5})
        result = semantic_miou(gt, pred, mode="open", similarity=sim,
                               labels=["alpha", "beta"])
        # tp_a=3, fp_a=0.5 -> 6/7; tp_b=0.5, fn_b=0.5 -> 0.5
        assert math.isclose(result.per_class["alpha"], 3.0 / 3.5)
        assert math.isclose(result.per_class["beta"], 0.5)
        assert math.isclose(result.miou, (3.0 / 3.5 + 0.5) / 2)

    def test_indicator_reduces_to_standard_exhaustive_4x4(self):
        rng = np.random.default_rng(1)
        labels = ["a", "b", "c"]
        for _ in range(200):
            gt = rng.integers(0, 3, size=(4, 4))
            pred = rng.integers(0, 3, size=(4, 4))
            std = semantic_miou(gt, pred, "standard")
            opn = semantic_miou(gt, pred, "open", IndicatorSimilarity(), labels)
            assert math.isclose(std.miou, opn.miou, abs_tol=1e-12)
            oracle_miou, _ = naive_standard_miou([gt], [pred])
            assert math.isclose(std.miou, oracle_miou, abs_tol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(DataError):
            semantic_miou(np.zeros((2, 2)), np.zeros((3, 3)))


class TestInstanceAP:
    def test_perfect_detections(self):
        gt = {"i": [seg(1, "a", block_mask(8, 8, 0, 4, 0, 4)),
                    seg(2, "b", block_mask(8, 8, 4, 8, 4, 8))]}
        pred = {"i": [seg(3, "a", block_mask(8, 8, 0, 4, 0, 4), score=0.9),
                      seg(4, "b", block_mask(8, 8, 4, 8, 4, 8), score=0.8)]}
        result = instance_ap(gt, pred, "standard")
        assert math.isclose(result.ap, 1.0)

    def test_single_cross_label_detection_hand_case(self, stub_similarity):
        gt = {"i": [seg(1, "suv", block_mask(8, 8, 0, 4, 0, 4))]}
        pred = {"i": [seg(2, "car", block_mask(8, 8, 0, 4, 0, 4), score=0.7)]}
        sim = stub_similarity({("suv", "car"): 0.6})
        result = instance_ap(gt, pred, "open", sim)
        # Matched at IoU 1 for every threshold: the suv curve holds one entry
        # with TP weight 0.6 -> precision 1 up to recall 0.6 -> AP 0.6.
        # The car label has no ground truth, so only suv enters the mean.
        assert math.isclose(result.ap, 0.6)
        assert set(result.per_class) == {"suv"}

    def test_no_ground_truth_undefined(self):
        result = instance_ap({}, {"i": [seg(1, "a", block_mask(2, 2, 0, 1, 0, 1),
                                            score=0.5)]}, "standard")
        assert not result.defined

    def test_missing_score_rejected(self):
        gt = {"i": [seg(1, "a", block_mask(2, 2, 0, 1, 0, 1))]}
        pred = {"i": [seg(2, "a", block_mask(2, 2, 0, 1, 0, 1))]}
        with pytest.raises(DataError, match="confidence"):
            instance_ap(gt, pred, "standard")

    def test_duplicate_detection_penalized(self):
        mask = block_mask(8, 8, 0, 4, 0, 4)
        gt = {"i": [seg(1, "a", mask)]}
        pred = {"i": [seg(2, "a", mask, score=0.9), seg(3, "a", mask, score=0.8)]}
        result = instance_ap(gt, pred, "standard")
        # Second detection is an unmatched FP at every threshold; the
        # envelope keeps precision 1 up to recall 1, so AP stays 1 under
        # all-point interpolation -- matching the oracle's convention.
        from oracles import naive_standard_ap

        oracle_ap, _ = naive_standard_ap(gt, pred, THRESHOLDS)
        assert math.isclose(result.ap, oracle_ap)


class TestMergedAndGrouped:
    def _world(self):
        table = make_class_table([(0, ["field"], False), (1, ["car"], True)])
        gt = {"i": [seg(1, "field", block_mask(8, 8, 0, 4, 0, 8)),
                    seg(2, "car", block_mask(8, 8, 4, 8, 0, 4))]}
        return table, gt

    def test_single_identity_set_equals_plain(self):
        table, gt = self._world()
        pred = {"i": [seg(3, "field", block_mask(8, 8, 0, 4, 0, 8), score=0.9),
                      seg(4, "car", block_mask(8, 8, 4, 8, 0, 4), score=0.9)]}
        name_sets = [{0: ["field"], 1: ["car"]}]
        merged = evaluate_merged(gt, pred, name_sets, table)
        plain = evaluate_segments(gt, pred, thing_labels={"car"})
        assert math.isclose(merged.pq, plain.pq)
        assert math.isclose(merged.ap, plain.ap)

    def test_fine_name_grouped_to_original(self):
        table, gt = self._world()
        pred = {"i": [seg(3, "sports field", block_mask(8, 8, 0, 4, 0, 8), score=0.9),
                      seg(4, "car", block_mask(8, 8, 4, 8, 0, 4), score=0.9)]}
        name_sets = [{0: ["field", "sports field"], 1: ["car"]}]
        report = evaluate_merged(gt, pred, name_sets, table)
        assert math.isclose(report.pq, 1.0)
        assert "field" in report.per_class

    def test_conflicting_mapping_lists_names(self):
        table, _ = self._world()
        name_sets = [{0: ["meadow"], 1: ["meadow"]}]
        with pytest.raises(ConfigurationError, match="meadow"):
            NameGrouping(name_sets, table)

    def test_unknown_predicted_name_rejected(self):
        table, gt = self._world()
        pred = {"i": [seg(3, "spaceship", block_mask(8, 8, 0, 4, 0, 8), score=0.9)]}
        with pytest.raises(ConfigurationError, match="spaceship"):
            evaluate_merged(gt, pred, [{0: ["field"], 1: ["car"]}], table)


class TestPerNameReport:
    def _report(self, values):
        report = EvalReport(mode="standard", protocol="plain")
        report.per_class = {name: {"iou": v} for name, v in values.items()}
        return report

    def test_top_and_bottom(self):
        report = self._report({"a": 0.9, "b": 0.5, "c": 0.1, "d": 0.7})
        top, bottom = per_name_report(report, 2)
        assert top == [("a", 0.9), ("d", 0.7)]
        assert bottom == [("c", 0.1), ("b", 0.5)]

    def test_ties_lexicographic(self):
        report = self._report({"b": 0.5, "a": 0.5, "c": 0.5})
        top, bottom = per_name_report(report, 3)
        assert [n for n, _ in top] == ["a", "b", "c"]
        assert [n for n, _ in bottom] == ["a", "b", "c"]

    def test_k_clipped_and_zero(self):
        report = self._report({"a": 0.9, "b": 0.5})
        top, bottom = per_name_report(report, 10)
        assert len(top) == len(bottom) == 2
        assert per_name_report(report, 0) == ([], [])


def test_image_order_invariance():
    rng = np.random.default_rng(4)
    labels = ["a", "b", "c"]
    gt, pred = {}, {}
    for image_id in ("x", "y", "z"):
        gmap = rng.integers(0, 3, size=(8, 8))
        pmap = rng.integers(0, 3, size=(8, 8))
        gt[image_id] = [seg(i + 1, labels[i], gmap == i, image_id=image_id)
                        for i in range(3) if (gmap == i).any()]
        pred[image_id] = [seg(i + 10, labels[i], pmap == i, score=float(rng.random()),
                              image_id=image_id)
                          for i in range(3) if (pmap == i).any()]
    report_fwd = evaluate_segments(gt, pred)
    reversed_gt = dict(reversed(list(gt.items())))
    reversed_pred = dict(reversed(list(pred.items())))
    report_rev = evaluate_segments(reversed_gt, reversed_pred)
    assert report_fwd.pq == report_rev.pq
    assert report_fwd.ap == report_rev.ap
