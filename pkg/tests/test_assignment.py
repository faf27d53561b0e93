import numpy as np
import pytest
from hypothesis import given, strategies as st

from obbkit.assignment import (
    MatchingConfig, assign_labels, matching_degree, matching_degree_matrix,
    positive_weights,
)
from obbkit.geometry import RotatedBox
from oracles import assign_reference, random_box

TARGET = RotatedBox(0, 0, 2, 2, 0)


def shift_for_iou(iou):
    """x-shift of a (2, 2) box against TARGET giving that axis-aligned IoU."""
    return 2.0 * (1.0 - iou) / (1.0 + iou)


def pair(iou_in, iou_out):
    """(anchor, regressed) with the requested overlaps against TARGET."""
    return (RotatedBox(shift_for_iou(iou_in), 0, 2, 2, 0),
            RotatedBox(shift_for_iou(iou_out), 0, 2, 2, 0))


def random_instance(rng, max_anchors=20, max_targets=5):
    n = int(rng.integers(1, max_anchors + 1))
    m = int(rng.integers(1, min(max_targets, n) + 1))
    targets = [random_box(rng, center=30, side_lo=4, side_hi=30) for _ in range(m)]
    anchors, regressed = [], []
    for _ in range(n):
        t = targets[int(rng.integers(0, m))]
        anchors.append(RotatedBox(t.cx + rng.uniform(-10, 10), t.cy + rng.uniform(-10, 10),
                                  rng.uniform(4, 30), rng.uniform(4, 30),
                                  rng.uniform(-1.5, 1.5)))
        regressed.append(RotatedBox(t.cx + rng.uniform(-6, 6), t.cy + rng.uniform(-6, 6),
                                    max(1.0, t.w + rng.uniform(-4, 4)),
                                    max(1.0, t.h + rng.uniform(-4, 4)),
                                    t.theta + rng.uniform(-0.6, 0.6)))
    return anchors, regressed, targets


class TestMatchingDegree:
    def test_equal_overlaps_pass_through(self, rng):
        cfg = MatchingConfig()
        for x in rng.uniform(0, 1, 100):
            assert matching_degree(x, x, cfg) == pytest.approx(float(x), abs=1e-15)

    def test_known_values(self):
        cfg = MatchingConfig(alpha=0.5, gamma=4.0)
        assert matching_degree(0.6, 0.8, cfg) == pytest.approx(0.6984, abs=1e-9)
        assert matching_degree(0.9, 0.1, cfg) == pytest.approx(0.0904, abs=1e-9)

    def test_alpha_specializations(self, rng):
        for _ in range(50):
            i, o = rng.uniform(0, 1, 2)
            u = abs(i - o)
            assert matching_degree(i, o, MatchingConfig(alpha=1.0)) == pytest.approx(i - u ** 4, abs=1e-15)
            assert matching_degree(i, o, MatchingConfig(alpha=0.0)) == pytest.approx(o - u ** 4, abs=1e-15)

    @given(st.floats(0, 1), st.floats(0, 1),
           st.floats(0, 1), st.floats(0.5, 8))
    def test_bounds(self, i, o, alpha, gamma):
        md = matching_degree(i, o, MatchingConfig(alpha=alpha, gamma=gamma))
        assert -1.0 <= md <= 1.0
        assert md <= max(i, o) + 1e-12

    def test_vectorized(self):
        cfg = MatchingConfig()
        out = matching_degree(np.array([0.6, 0.9]), np.array([0.8, 0.1]), cfg)
        assert out == pytest.approx([0.6984, 0.0904], abs=1e-9)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MatchingConfig(alpha=1.5)
        with pytest.raises(ValueError):
            MatchingConfig(gamma=0.0)
        with pytest.raises(ValueError):
            MatchingConfig(stage="unknown")

    def test_stage_thresholds(self):
        assert MatchingConfig.refinement().pos_threshold == 0.4
        assert MatchingConfig.detection().pos_threshold == 0.6
        assert MatchingConfig(stage="detection", pos_threshold=0.3).pos_threshold == 0.3


class TestPositiveWeights:
    def test_pair(self):
        assert positive_weights([0.5, 0.7]) == pytest.approx([0.8, 1.0], abs=1e-12)

    def test_single_saturates(self):
        assert positive_weights([0.62]) == pytest.approx([1.0])
        assert positive_weights([0.62])[0] == 1.0

    def test_tie_saturates_both(self):
        w = positive_weights([0.6, 0.6])
        assert w[0] == 1.0 and w[1] == 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            positive_weights([])


class TestAssignLabels:
    def test_threshold_selects_single_positive(self):
        pairs = [pair(0.3, 0.3), pair(0.5, 0.5), pair(0.65, 0.65)]
        anchors = [p[0] for p in pairs]
        regressed = [p[1] for p in pairs]
        res = assign_labels(anchors, regressed, [TARGET], MatchingConfig.detection())
        assert list(res.is_positive) == [False, False, True]
        assert list(res.target_index) == [0, 0, 0]
        assert res.weight[2] == 1.0

    def test_fallback_promotes_best(self):
        pairs = [pair(0.3, 0.3), pair(0.5, 0.5)]
        res = assign_labels([p[0] for p in pairs], [p[1] for p in pairs],
                            [TARGET], MatchingConfig.detection())
        assert list(res.is_positive) == [False, True]
        assert res.weight[1] == 1.0

    def test_no_targets_all_negative(self):
        anchors = [RotatedBox(0, 0, 2, 2, 0), RotatedBox(5, 5, 2, 2, 0)]
        res = assign_labels(anchors, anchors, [], MatchingConfig.detection())
        assert not res.is_positive.any()
        assert list(res.target_index) == [-1, -1]
        assert not res.weight.any()

    def test_no_anchors(self):
        res = assign_labels([], [], [TARGET], MatchingConfig.detection())
        assert len(res.is_positive) == 0

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            assign_labels([TARGET], [], [TARGET], MatchingConfig())

    def test_matches_reference_enumeration(self, rng):
        for _ in range(60):
            anchors, regressed, targets = random_instance(rng)
            for cfg in (MatchingConfig.refinement(), MatchingConfig.detection()):
                res = assign_labels(anchors, regressed, targets, cfg)
                positive, matched, md_best, weights = assign_reference(
                    anchors, regressed, targets, cfg)
                assert list(res.is_positive) == positive
                assert list(res.target_index) == matched
                assert np.allclose(res.matching_degree, md_best, atol=1e-12)
                assert np.allclose(res.weight, weights, atol=1e-12)

    def test_every_target_served_and_max_weight_one(self, rng):
        for _ in range(40):
            anchors, regressed, targets = random_instance(rng)
            res = assign_labels(anchors, regressed, targets, MatchingConfig.detection())
            for j in range(len(targets)):
                members = np.flatnonzero(res.is_positive & (res.target_index == j))
                assert members.size >= 1
                assert res.weight[members].max() == 1.0
                assert np.all(res.weight[members] <= 1.0)

    def test_raising_threshold_never_adds_threshold_positives(self, rng):
        for _ in range(20):
            anchors, regressed, targets = random_instance(rng)
            lo = assign_labels(anchors, regressed, targets,
                               MatchingConfig(stage="detection", pos_threshold=0.3))
            hi = assign_labels(anchors, regressed, targets,
                               MatchingConfig(stage="detection", pos_threshold=0.6))
            for i in range(len(anchors)):
                if hi.is_positive[i] and hi.matching_degree[i] >= 0.6:
                    assert lo.is_positive[i]

    def test_matrix_shape(self, rng):
        anchors, regressed, targets = random_instance(rng)
        md = matching_degree_matrix(anchors, regressed, targets, MatchingConfig())
        assert md.shape == (len(anchors), len(targets))
