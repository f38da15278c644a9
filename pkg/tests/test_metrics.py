import math
import statistics

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from icost.errors import EmptyFold, ValidationError
from icost.metrics import (METRIC_NAMES, ConfusionTally, FoldMetrics, aggregate_folds,
                           binary_metrics, macro_metrics, mcc, multiclass_metrics, roc_auc)


def test_perfect_classifier():
    m = binary_metrics(ConfusionTally(tp=5, fn=0, tn=95, fp=0))
    assert (m.sensitivity, m.specificity, m.mcc, m.gmean, m.accuracy) == (1, 1, 1, 1, 1)


def test_gmean_worked_example():
    # 100 positives, 10000 negatives, both classes at 0.8 recall
    t = ConfusionTally(tp=80, fn=20, tn=8000, fp=2000)
    m = binary_metrics(t)
    assert t.fn == 20 and t.fp == 2000
    assert m.sensitivity == 0.8 and m.specificity == 0.8
    assert m.gmean == 0.8


def test_mcc_hand_value():
    assert round(mcc(ConfusionTally(tp=30, fn=10, tn=50, fp=10)), 3) == 0.583
    assert mcc(ConfusionTally(tp=30, fn=10, tn=50, fp=10)) == pytest.approx(1400 / 2400, abs=1e-15)


def test_zero_division_conventions():
    m = binary_metrics(ConfusionTally(tp=0, fn=5, tn=95, fp=0))
    assert m.precision == 0.0 and m.f1 == 0.0 and m.mcc == 0.0
    assert m.sensitivity == 0.0 and m.specificity == 1.0
    m = binary_metrics(ConfusionTally(tp=0, fn=0, tn=10, fp=0))
    assert m.sensitivity == 0.0 and m.mcc == 0.0
    assert all(math.isfinite(v) for v in m.as_array())


def test_empty_fold():
    with pytest.raises(EmptyFold):
        binary_metrics(ConfusionTally(0, 0, 0, 0))
    with pytest.raises(ValidationError):
        ConfusionTally(-1, 0, 0, 0)


def test_auc_extremes_and_ties():
    y = [1, 1, 0, 0, 0]
    assert roc_auc([0.9, 0.8, 0.1, 0.2, 0.3], y) == 1.0
    assert roc_auc([0.1, 0.2, 0.9, 0.8, 0.7], y) == 0.0
    assert roc_auc([0.4] * 5, y) == 0.5
    assert roc_auc([0.5, 0.3, 0.3, 0.1, 0.1], y) == pytest.approx(oracles.pairwise_auc([0.5, 0.3, 0.3, 0.1, 0.1], y))
    assert roc_auc([1, 2, 3], [0, 0, 0]) == 0.5


@given(st.integers(0, 2**31))
@settings(max_examples=60, deadline=None)
def test_auc_monotone_invariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 60))
    s = np.round(rng.normal(size=n), 1)
    y = rng.integers(0, 2, n)
    a = roc_auc(s, y)
    assert a == roc_auc(np.exp(s), y) == roc_auc(3 * s + 7, y)
    assert a == pytest.approx(oracles.pairwise_auc(s, y), abs=1e-12)


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_mcc_class_swap_symmetry(tp, fn, tn, fp):
    assert mcc(ConfusionTally(tp, fn, tn, fp)) == pytest.approx(mcc(ConfusionTally(tn, fp, tp, fn)), abs=1e-15)


@given(st.integers(0, 50), st.integers(0, 50), st.integers(0, 50), st.integers(0, 50))
def test_metric_identities(tp, fn, tn, fp):
    if tp + fn + tn + fp == 0:
        return
    m = binary_metrics(ConfusionTally(tp, fn, tn, fp))
    assert m.gmean == math.sqrt(m.sensitivity * m.specificity)
    if m.precision + m.sensitivity > 0:
        assert m.f1 == pytest.approx(2 * m.precision * m.sensitivity / (m.precision + m.sensitivity))
    assert -1 <= m.mcc <= 1
    for name in METRIC_NAMES:
        if name != "mcc":
            assert 0 <= getattr(m, name) <= 1


def test_random_vectors_match_counting_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        n = int(rng.integers(1, 80))
        y = rng.integers(0, 2, n)
        p = rng.integers(0, 2, n)
        s = rng.normal(size=n)
        got = binary_metrics(ConfusionTally.from_predictions(y, p), s, y).as_dict()
        want = oracles.metrics_by_counting(y, p, s)
        for k in METRIC_NAMES:
            assert abs(got[k] - want[k]) < 1e-12, k


def test_macro_all_perfect():
    y = np.array([0, 1, 2, 0, 1, 2])
    S = np.eye(3)[y]
    m = multiclass_metrics(y, y, S, 3)
    assert all(v == 1.0 for v in m.as_array())


def test_macro_two_class_identity():
    y = np.array([1, 1, 1, 0, 0, 0, 0, 0])
    p = np.array([1, 0, 0, 0, 0, 1, 0, 0])
    bin_ = binary_metrics(ConfusionTally.from_predictions(y, p))
    mac = multiclass_metrics(y, p, None, 2)
    assert mac.sensitivity == pytest.approx((bin_.sensitivity + bin_.specificity) / 2)


def test_macro_three_class_hand():
    y = np.array([0, 0, 0, 0, 1, 1, 1, 2, 2, 2])
    p = np.array([0, 0, 0, 1, 1, 1, 2, 2, 2, 2])
    m = multiclass_metrics(y, p, None, 3)
    assert m.sensitivity == pytest.approx((3 / 4 + 2 / 3 + 1) / 3)
    assert m.specificity == pytest.approx((1 + 6 / 7 + 6 / 7) / 3)
    assert m.precision == pytest.approx((1 + 2 / 3 + 3 / 4) / 3)
    assert m.accuracy == pytest.approx((0.9 + 0.8 + 0.9) / 3)
    assert m.f1 == pytest.approx((6 / 7 + 2 / 3 + 6 / 7) / 3)
    assert m.mcc == pytest.approx((2 * 18 / math.sqrt(504) + 11 / 21) / 3)
    assert m.gmean == pytest.approx((math.sqrt(0.75) + math.sqrt(2 / 3 * 6 / 7) + math.sqrt(6 / 7)) / 3)


def test_macro_needs_two_classes():
    with pytest.raises(ValidationError):
        macro_metrics([(ConfusionTally(1, 0, 1, 0), None, None)])


def fold(v):
    return FoldMetrics.from_array([v] * 8)


def test_aggregate_identical():
    for v in (0.1, 0.3, 0.7, 1 / 3):
        r = aggregate_folds([fold(v)] * 50)
        assert r.mean.mcc == v and r.std.mcc == 0.0


def test_aggregate_two_folds():
    r = aggregate_folds([fold(0.4), fold(0.6)])
    assert r.mean.mcc == 0.5
    assert r.std.mcc == pytest.approx(math.sqrt(0.02))


def test_aggregate_single_and_empty():
    assert aggregate_folds([fold(0.2)]).std.accuracy == 0.0
    with pytest.raises(EmptyFold):
        aggregate_folds([])


def test_aggregate_fifty_folds_independent_summation():
    rng = np.random.default_rng(50)
    A = rng.uniform(size=(50, 8))
    r = aggregate_folds(FoldMetrics.from_array(a) for a in A)
    for j, name in enumerate(METRIC_NAMES):
        col = A[:, j].tolist()
        mean = math.fsum(col) / 50
        sd = math.sqrt(math.fsum((x - mean) ** 2 for x in col) / 49)
        assert getattr(r.mean, name) == pytest.approx(mean, abs=1e-15)
        assert getattr(r.std, name) == pytest.approx(sd, rel=1e-12)
    # order of folds does not matter
    r2 = aggregate_folds(FoldMetrics.from_array(a) for a in A[::-1])
    assert r2.mean == r.mean


def test_report_dict():
    r = aggregate_folds([fold(0.4), fold(0.6)])
    d = r.to_dict()
    assert d["n_folds"] == 2 and set(d["mean"]) == set(METRIC_NAMES)
    assert statistics.mean(f["mcc"] for f in d["folds"]) == d["mean"]["mcc"]
