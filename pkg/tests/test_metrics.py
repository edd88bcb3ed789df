import numpy as np
import pytest

from auscult.metrics import (
    ALARM,
    NOT_ALARM,
    ConfusionCounts,
    balanced_accuracy,
    counts_from_flags,
    counts_from_labels,
    f1,
    merge_to_alarm,
)

from oracles import reference_binary_metrics


def random_flag_lists(rng, n):
    actual = [int(v) for v in rng.integers(0, 2, size=n)]
    predicted = [int(v) for v in rng.integers(0, 2, size=n)]
    return actual, predicted


class TestMergeToAlarm:
    def test_pinned_mapping(self):
        assert merge_to_alarm(0) == NOT_ALARM
        assert merge_to_alarm(1) == NOT_ALARM
        assert merge_to_alarm(2) == ALARM

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError):
            merge_to_alarm(3)
        with pytest.raises(ValueError):
            merge_to_alarm(-1)


class TestConfusionCounts:
    def test_total(self):
        c = ConfusionCounts(tp=1, fp=2, tn=3, fn=4)
        assert c.total == 10

    def test_negative_count_rejected(self):
        with pytest.raises(ValueError):
            ConfusionCounts(tp=-1, fp=0, tn=0, fn=0)

    def test_counts_from_flags(self):
        actual = [1, 1, 0, 0, 1]
        predicted = [1, 0, 0, 1, 1]
        c = counts_from_flags(actual, predicted)
        assert (c.tp, c.fp, c.tn, c.fn) == (2, 1, 1, 1)

    def test_counts_from_labels_merges_first(self):
        # 0 and 1 collapse to the same negative flag
        actual = [0, 1, 2, 2]
        predicted = [1, 0, 2, 0]
        c = counts_from_labels(actual, predicted)
        assert (c.tp, c.fp, c.tn, c.fn) == (1, 0, 2, 1)

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            counts_from_flags([1, 0], [1])


class TestBalancedAccuracy:
    def test_perfect_classifier(self):
        assert balanced_accuracy(ConfusionCounts(tp=5, fp=0, tn=7, fn=0)) == 1.0

    def test_direct_formula(self):
        # sensitivity 0.8 and specificity 0.6
        c = ConfusionCounts(tp=8, fp=4, tn=6, fn=2)
        assert balanced_accuracy(c) == pytest.approx(0.7)

    def test_degenerate_side_contributes_zero_with_warning(self):
        c = ConfusionCounts(tp=0, fp=0, tn=4, fn=0)
        with pytest.warns(RuntimeWarning):
            assert balanced_accuracy(c) == pytest.approx(0.5)

    def test_all_counts_zero(self):
        with pytest.warns(RuntimeWarning):
            assert balanced_accuracy(ConfusionCounts(0, 0, 0, 0)) == 0.0


class TestF1:
    def test_perfect(self):
        assert f1(ConfusionCounts(tp=5, fp=0, tn=5, fn=0)) == 1.0

    def test_precision_one_recall_half(self):
        c = ConfusionCounts(tp=1, fp=0, tn=3, fn=1)
        assert f1(c) == pytest.approx(2 / 3)

    def test_not_alarm_side_swaps_roles(self):
        c = ConfusionCounts(tp=1, fp=2, tn=3, fn=4)
        swapped = ConfusionCounts(tp=3, fp=4, tn=1, fn=2)
        assert f1(c, positive_class=NOT_ALARM) == f1(swapped, positive_class=ALARM)

    def test_undefined_cases_warn_and_return_zero(self):
        with pytest.warns(RuntimeWarning):
            assert f1(ConfusionCounts(tp=0, fp=0, tn=3, fn=2)) == 0.0
        with pytest.warns(RuntimeWarning):
            assert f1(ConfusionCounts(tp=0, fp=2, tn=3, fn=0)) == 0.0


class TestAgainstListOracle:
    def test_hundred_random_configurations(self):
        rng = np.random.default_rng(0)
        checked = 0
        for _ in range(100):
            actual, predicted = random_flag_lists(rng, int(rng.integers(1, 60)))
            c = counts_from_flags(actual, predicted)
            want_bac, want_f1_pos, want_f1_neg = reference_binary_metrics(
                actual, predicted)
            with pytest.warns() if _is_degenerate(c) else _no_warning():
                assert abs(balanced_accuracy(c) - want_bac) < 1e-12
                assert abs(f1(c, positive_class=ALARM) - want_f1_pos) < 1e-12
                assert abs(f1(c, positive_class=NOT_ALARM) - want_f1_neg) < 1e-12
            checked += 1
        assert checked == 100

    def test_bounds_hold_everywhere(self):
        rng = np.random.default_rng(1)
        import warnings
        for _ in range(200):
            counts = ConfusionCounts(*(int(v) for v in rng.integers(0, 20, size=4)))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                assert 0.0 <= balanced_accuracy(counts) <= 1.0
                assert 0.0 <= f1(counts, positive_class=ALARM) <= 1.0
                assert 0.0 <= f1(counts, positive_class=NOT_ALARM) <= 1.0

    def test_relabel_invariance_after_merge(self):
        # swapping raw labels 0 and 1 everywhere cannot move any metric,
        # because both collapse into the not-alarm flag
        rng = np.random.default_rng(2)
        for _ in range(50):
            actual = [int(v) for v in rng.integers(0, 3, size=40)]
            predicted = [int(v) for v in rng.integers(0, 3, size=40)]
            swap = {0: 1, 1: 0, 2: 2}
            a = counts_from_labels(actual, predicted)
            b = counts_from_labels([swap[v] for v in actual],
                                   [swap[v] for v in predicted])
            assert a == b


def _is_degenerate(c):
    # one of the three metric calls warns exactly when a true-positive or
    # true-negative count is missing entirely
    return c.tp == 0 or c.tn == 0


class _no_warning:
    def __enter__(self):
        return self

    def __exit__(self, *exc):
        return False
