"""Confusion-matrix metrics, normalization, and adaptive class weights."""

import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapforge.errors import ValidationError
from mapforge.metrics import (
    AcwState,
    ConfusionMatrix,
    accumulate_confusion,
    acw_update,
    merge_confusion,
    metrics_report,
    normalize_confusion,
    report_to_dict,
    report_to_text,
    write_report,
)


def random_mask(rng, h, w, c=5):
    return np.array([[rng.randint(1, c) for _ in range(w)] for _ in range(h)], dtype=np.uint8)


class TestAccumulate:
    def test_perfect_prediction_fills_diagonal(self):
        mask = np.ones((10, 10), dtype=np.uint8)
        cm = accumulate_confusion(mask, mask, ConfusionMatrix(5))
        assert cm.counts[0, 0] == 100
        assert cm.total == 100
        assert np.count_nonzero(cm.counts) == 1

    def test_two_pixel_example(self):
        truth = np.array([[1], [2]], dtype=np.uint8)
        pred = np.array([[2], [2]], dtype=np.uint8)
        cm = accumulate_confusion(pred, truth, ConfusionMatrix(5))
        assert cm.counts[0, 1] == 1  # truth 1 predicted 2
        assert cm.counts[1, 1] == 1
        assert cm.total == 2

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            accumulate_confusion(
                np.ones((2, 2), dtype=np.uint8), np.ones((2, 3), dtype=np.uint8), ConfusionMatrix(5)
            )

    def test_out_of_range_class_rejected(self):
        bad = np.full((2, 2), 6, dtype=np.uint8)
        ok = np.ones((2, 2), dtype=np.uint8)
        with pytest.raises(ValidationError):
            accumulate_confusion(bad, ok, ConfusionMatrix(5))
        with pytest.raises(ValidationError):
            accumulate_confusion(ok, np.zeros((2, 2), dtype=np.uint8), ConfusionMatrix(5))

    def test_merge_equals_whole_image_count(self):
        rng = random.Random(7)
        for _ in range(100):
            truth = random_mask(rng, 8, 8)
            pred = random_mask(rng, 8, 8)
            whole = accumulate_confusion(pred, truth, ConfusionMatrix(5))
            top = accumulate_confusion(pred[:4], truth[:4], ConfusionMatrix(5))
            bottom = accumulate_confusion(pred[4:], truth[4:], ConfusionMatrix(5))
            merged = merge_confusion(top, bottom)
            assert np.array_equal(merged.counts, whole.counts)
            flipped = merge_confusion(bottom, top)
            assert np.array_equal(flipped.counts, whole.counts)

    def test_merge_class_count_mismatch(self):
        with pytest.raises(ValidationError):
            merge_confusion(ConfusionMatrix(5), ConfusionMatrix(4))


class TestReport:
    def test_identity_matrix_all_ones(self):
        cm = ConfusionMatrix(3, np.diag([10, 20, 30]))
        rep = metrics_report(cm)
        assert rep.accuracy == 1.0
        assert rep.kappa == 1.0
        assert rep.micro_f1 == 1.0
        for m in rep.per_class.values():
            assert m.precision == 1.0 and m.recall == 1.0
            assert m.f1 == 1.0 and m.iou == 1.0
        assert rep.macro_f1 == 1.0

    def test_hand_computed_two_class_example(self):
        cm = ConfusionMatrix(2, np.array([[40, 10], [20, 30]]))
        rep = metrics_report(cm)
        assert rep.accuracy == pytest.approx(0.7, abs=1e-12)
        assert rep.kappa == pytest.approx(0.4, abs=1e-12)
        c0 = rep.per_class[1]
        assert c0.precision == pytest.approx(2 / 3, abs=1e-12)
        assert c0.recall == pytest.approx(0.8, abs=1e-12)
        assert c0.f1 == pytest.approx(16 / 22, abs=1e-12)
        assert c0.iou == pytest.approx(4 / 7, abs=1e-12)

    def test_iou_from_tp_fp_fn(self):
        # TP=50, FP=10, FN=40 for class 1 → IoU = 50/100
        cm = ConfusionMatrix(2, np.array([[50, 40], [10, 0]]))
        rep = metrics_report(cm)
        assert rep.per_class[1].iou == pytest.approx(0.5, abs=1e-12)

    def test_absent_class_reports_undefined_not_zero(self):
        cm = ConfusionMatrix(3, np.array([[5, 0, 0], [0, 5, 0], [0, 0, 0]]))
        rep = metrics_report(cm)
        m3 = rep.per_class[3]
        assert m3.precision is None and m3.recall is None
        assert m3.f1 is None and m3.iou is None
        # Macro means skip class 3 entirely instead of averaging in zeros.
        assert rep.macro_precision == 1.0
        assert rep.macro_iou == 1.0

    def test_empty_matrix_rejected(self):
        with pytest.raises(ValidationError):
            metrics_report(ConfusionMatrix(2))

    def test_kappa_single_class_degenerate(self):
        # All mass on one diagonal cell: chance agreement is total, and
        # so is observed agreement, so kappa stays 1.
        rep = metrics_report(ConfusionMatrix(2, np.array([[10, 0], [0, 0]])))
        assert rep.kappa == 1.0
        # All mass on one off-diagonal cell: the marginals never overlap,
        # chance agreement is 0, and kappa collapses to plain accuracy 0.
        rep = metrics_report(ConfusionMatrix(2, np.array([[0, 10], [0, 0]])))
        assert rep.kappa == 0.0

    def test_micro_f1_equals_accuracy(self):
        rng = random.Random(3)
        cm = accumulate_confusion(random_mask(rng, 16, 16), random_mask(rng, 16, 16), ConfusionMatrix(5))
        rep = metrics_report(cm)
        assert rep.micro_f1 == rep.accuracy

    @given(
        st.lists(
            st.lists(st.integers(min_value=0, max_value=50), min_size=3, max_size=3),
            min_size=3,
            max_size=3,
        )
    )
    @settings(max_examples=200, deadline=None)
    def test_defined_values_in_range(self, rows):
        counts = np.array(rows, dtype=np.int64)
        if counts.sum() == 0:
            return
        rep = metrics_report(ConfusionMatrix(3, counts))
        assert 0.0 <= rep.accuracy <= 1.0
        if rep.kappa is not None:
            assert -1.0 - 1e-12 <= rep.kappa <= 1.0 + 1e-12
        for m in rep.per_class.values():
            for v in (m.precision, m.recall, m.f1, m.iou):
                if v is not None:
                    assert 0.0 <= v <= 1.0

    @given(
        st.lists(
            st.lists(st.integers(min_value=0, max_value=30), min_size=4, max_size=4),
            min_size=4,
            max_size=4,
        ),
        st.permutations(range(4)),
    )
    @settings(max_examples=100, deadline=None)
    def test_relabel_equivariance(self, rows, perm):
        counts = np.array(rows, dtype=np.int64)
        if counts.sum() == 0:
            return
        base = metrics_report(ConfusionMatrix(4, counts))
        permuted = counts[np.ix_(perm, perm)]
        moved = metrics_report(ConfusionMatrix(4, permuted))
        assert moved.accuracy == pytest.approx(base.accuracy, abs=1e-12)
        for new_idx, old_idx in enumerate(perm):
            a = base.per_class[old_idx + 1]
            b = moved.per_class[new_idx + 1]
            for x, y in ((a.precision, b.precision), (a.recall, b.recall), (a.iou, b.iou)):
                if x is None:
                    assert y is None
                else:
                    assert y == pytest.approx(x, abs=1e-12)

    def test_kappa_one_iff_diagonal(self):
        rng = random.Random(5)
        for _ in range(50):
            counts = np.array([[rng.randint(0, 9) for _ in range(3)] for _ in range(3)])
            if counts.sum() == 0:
                continue
            rep = metrics_report(ConfusionMatrix(3, counts))
            diagonal = counts.sum() == np.trace(counts)
            if rep.kappa == 1.0:
                assert diagonal
            if diagonal:
                assert rep.kappa == 1.0


class TestNormalize:
    def test_hand_example(self):
        norm, zeros = normalize_confusion(ConfusionMatrix(2, np.array([[40, 10], [20, 30]])))
        assert np.allclose(norm, [[0.8, 0.2], [0.4, 0.6]], atol=1e-12)
        assert zeros == []

    def test_diagonal_to_identity(self):
        norm, zeros = normalize_confusion(ConfusionMatrix(3, np.diag([3, 7, 2])))
        assert np.array_equal(norm, np.eye(3))
        assert zeros == []

    def test_zero_row_flagged(self):
        norm, zeros = normalize_confusion(
            ConfusionMatrix(3, np.array([[4, 0, 0], [0, 0, 0], [1, 1, 2]]))
        )
        assert zeros == [2]
        assert (norm[1] == 0).all()
        assert norm[0].sum() == pytest.approx(1.0, abs=1e-12)
        assert norm[2].sum() == pytest.approx(1.0, abs=1e-12)


class TestAcw:
    def test_equal_frequencies_equal_weights(self):
        batch = np.array([[1, 2], [2, 1]], dtype=np.uint8)
        _, weights = acw_update(AcwState(2), batch)
        assert weights == [1.0, 1.0]

    def test_hand_example_three_to_one(self):
        batch = np.array([1, 1, 1, 2], dtype=np.uint8)
        _, weights = acw_update(AcwState(2), batch)
        assert weights[0] == pytest.approx(0.5, abs=1e-12)
        assert weights[1] == pytest.approx(1.5, abs=1e-12)

    def test_unseen_class_undefined(self):
        batch = np.array([1, 1, 2, 2], dtype=np.uint8)
        _, weights = acw_update(AcwState(3), batch)
        assert weights[2] is None
        assert weights[0] == weights[1] == 1.0

    def test_ema_blends_toward_new_batch(self):
        state = AcwState(2)
        acw_update(state, np.array([1, 1, 1, 2], dtype=np.uint8))
        first = state.freq.copy()
        assert first[0] == pytest.approx(0.75)
        acw_update(state, np.array([2, 2, 2, 1], dtype=np.uint8))
        # decay 0.9: 0.9*0.75 + 0.1*0.25 = 0.7
        assert state.freq[0] == pytest.approx(0.7, abs=1e-12)
        assert state.freq[1] == pytest.approx(0.3, abs=1e-12)
        assert state.iterations == 2

    def test_weights_mean_one_over_defined(self):
        rng = random.Random(9)
        state = AcwState(5)
        for _ in range(10):
            batch = random_mask(rng, 6, 6)
            _, weights = acw_update(state, batch)
            defined = [w for w in weights if w is not None]
            assert sum(defined) / len(defined) == pytest.approx(1.0, abs=1e-12)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValidationError):
            acw_update(AcwState(2), np.array([], dtype=np.uint8))

    def test_deterministic_given_sequence(self):
        rng = random.Random(11)
        batches = [random_mask(rng, 4, 4) for _ in range(5)]
        s1, s2 = AcwState(5), AcwState(5)
        for b in batches:
            _, w1 = acw_update(s1, b)
            _, w2 = acw_update(s2, b)
            assert w1 == w2
        assert np.array_equal(s1.freq, s2.freq)


class TestReportOutput:
    def test_text_marks_undefined(self):
        cm = ConfusionMatrix(3, np.array([[5, 0, 0], [0, 5, 0], [0, 0, 0]]))
        text = report_to_text(metrics_report(cm))
        assert "undefined" in text
        assert "accuracy" in text and "kappa" in text

    def test_json_round_trip(self, tmp_path):
        import json

        cm = ConfusionMatrix(2, np.array([[40, 10], [20, 30]]))
        rep = metrics_report(cm)
        path = tmp_path / "report.json"
        write_report(rep, path)
        loaded = json.loads(path.read_text())
        assert loaded == report_to_dict(rep)
        assert loaded["accuracy"] == pytest.approx(0.7)
        assert loaded["per_class"]["1"]["iou"] == pytest.approx(4 / 7)
