import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from icost.errors import DegenerateLabels, DimensionMismatch, ValidationError
from icost.learners import (LearnerConfig, LinearSvmModel, LogRegModel, model_from_dict,
                            model_to_dict, predict_score, same_model, train_forest,
                            train_linear_svm, train_logreg, train_tree)
from icost.learners import logreg, svm
from icost.learners.tree import TreeModel, split_impurity, weighted_gini


def blobs(seed, n=40, d=2, shift=1.5):
    rng = np.random.default_rng(seed)
    h = n // 2
    X = np.vstack([rng.normal(size=(h, d)) + shift, rng.normal(size=(n - h, d)) - shift])
    y = np.array([1] * h + [0] * (n - h))
    return X, y


# -- logistic regression ---------------------------------------------------

def test_logreg_zero_params_score_half():
    m = LogRegModel(np.zeros(3), 0.0, 1e-4, 0, 0.0)
    assert predict_score(m, [1.0, -7.0, 3.0]) == 0.5


def test_logreg_separable_two_points():
    m = train_logreg([[-1.0], [1.0]], [0, 1])
    np.testing.assert_array_equal(m.predict([[-1.0], [1.0]]), [0, 1])
    assert np.isfinite(m.coefficients).all() and np.isfinite(m.intercept)


def test_logreg_ones_equals_unweighted():
    X, y = blobs(1)
    assert same_model(train_logreg(X, y), train_logreg(X, y, np.ones(len(y))))


def test_logreg_weight_matches_replication_trajectory():
    X, y = blobs(2, n=20)
    w = np.ones(20)
    w[[0, 3, 15]] = [3, 2, 4]
    rep = np.repeat(np.arange(20), w.astype(int))
    a = train_logreg(X, y, w, max_iter=50)
    b = train_logreg(X[rep], y[rep], max_iter=50)
    np.testing.assert_allclose(a.coefficients, b.coefficients, rtol=1e-9, atol=1e-12)
    assert a.intercept == pytest.approx(b.intercept, rel=1e-9, abs=1e-12)


def test_logreg_weight_shifts_boundary():
    X, y = blobs(3, n=60, shift=0.5)
    plain = train_logreg(X, y)
    w = np.where(y == 1, 5.0, 1.0)
    heavy = train_logreg(X, y, w)
    assert heavy.predict(X).sum() > plain.predict(X).sum()


def test_logreg_converges_and_records():
    X, y = blobs(4)
    m = train_logreg(X, y)
    assert 1 <= m.iterations_run <= 1000
    params = np.append(m.coefficients, m.intercept)
    assert m.final_loss == pytest.approx(logreg.objective(params, X, y, None, m.l2))
    g = logreg.gradient(params, X, y, None, m.l2)
    assert np.abs(g).max() < 1e-3


def test_logreg_separable_stays_finite():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    m = train_logreg(X, [0, 0, 1, 1])
    assert np.isfinite(m.coefficients).all()


def test_logreg_errors():
    with pytest.raises(DegenerateLabels):
        train_logreg([[0.0], [1.0]], [1, 1])
    with pytest.raises(ValidationError):
        train_logreg([[0.0], [1.0]], [0, 1], [1.0, 0.0])
    with pytest.raises(DimensionMismatch):
        train_logreg([[0.0], [1.0]], [0, 1]).score([[1.0, 2.0]])


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_logreg_gradient_property(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(3, 30)), int(rng.integers(1, 5))
    X = rng.normal(size=(n, d))
    y = rng.integers(0, 2, n)
    w = rng.uniform(0.5, 10, n)
    p = rng.normal(size=d + 1)
    h = 1e-6
    num = np.array([(logreg.objective(p + h * e, X, y, w, 0.01) - logreg.objective(p - h * e, X, y, w, 0.01))
                    / (2 * h) for e in np.eye(d + 1)])
    ana = logreg.gradient(p, X, y, w, 0.01)
    assert np.linalg.norm(ana - num) <= 1e-5 * max(np.linalg.norm(ana), 1e-3)


# -- SVM ---------------------------------------------------------------------

def test_svm_signed_margin_score():
    m = LinearSvmModel(np.array([1.0]), 0.0, 1.0)
    assert predict_score(m, [2.0]) == 2.0


def test_svm_two_point_symmetry():
    m = train_linear_svm([[-1.0], [1.0]], [0, 1], lam=1.0)
    assert m.w[0] > 0
    assert abs(m.b / m.w[0]) < 0.1


def test_svm_weight_scale_equivalence():
    X, y = blobs(5)
    rng = np.random.default_rng(0)
    w = rng.uniform(1, 5, len(y))
    for c in (0.5, 3.0, 10.0):
        a = train_linear_svm(X, y, w, lam=0.7, epochs=50, seed=3)
        b = train_linear_svm(X, y, c * w, lam=0.7 * c, epochs=50, seed=3)
        np.testing.assert_allclose(a.w, b.w, atol=1e-6)
        assert a.b == pytest.approx(b.b, abs=1e-6)


def test_svm_matches_reference_objective():
    X, y = blobs(7)
    m = train_linear_svm(X, y, lam=1.0)
    ours = svm.objective(np.append(m.w, m.b), X, y, None, 1.0)
    ref = oracles.svm_reference_objective(X, y, np.ones(len(y)), 1.0)
    assert abs(ours - ref) <= 0.01 * ref


def test_svm_reference_gap_distribution():
    # final iterate after the default 200 epochs, over a spread of easy and
    # nearly separable fixtures; separable ones converge slowest
    gaps = []
    for seed in range(10):
        for shift in (0.5, 1.5):
            X, y = blobs(seed, shift=shift)
            m = train_linear_svm(X, y, lam=1.0)
            ours = svm.objective(np.append(m.w, m.b), X, y, None, 1.0)
            ref = oracles.svm_reference_objective(X, y, np.ones(len(y)), 1.0, iters=20000)
            gaps.append((ours - ref) / ref)
    gaps = np.array(gaps)
    assert gaps.min() > -1e-3
    assert np.median(gaps) < 0.005
    assert gaps.max() < 0.1


def test_svm_seed_changes_order_only():
    X, y = blobs(8)
    a = train_linear_svm(X, y, seed=1)
    b = train_linear_svm(X, y, seed=1)
    assert same_model(a, b)
    c = train_linear_svm(X, y, seed=2)
    assert not same_model(a, c)
    np.testing.assert_allclose(a.w, c.w, rtol=0.2)


def test_svm_ones_equals_unweighted():
    X, y = blobs(9)
    assert same_model(train_linear_svm(X, y, seed=4), train_linear_svm(X, y, np.ones(len(y)), seed=4))


def test_svm_weighted_shifts_boundary():
    X, y = blobs(10, n=80, shift=0.4)
    plain = train_linear_svm(X, y)
    heavy = train_linear_svm(X, y, np.where(y == 1, 6.0, 1.0))
    assert heavy.predict(X).sum() > plain.predict(X).sum()


@given(st.integers(0, 2**31))
@settings(max_examples=30, deadline=None)
def test_weighted_objective_equals_replicated(seed):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(2, 15)), int(rng.integers(1, 4))
    X = rng.normal(size=(n, d))
    y = rng.integers(0, 2, n)
    w = rng.integers(1, 5, n).astype(float)
    rep = np.repeat(np.arange(n), w.astype(int))
    p = rng.normal(size=d + 1) * 2
    a = logreg.objective(p, X, y, w, 0.1)
    b = logreg.objective(p, X[rep], y[rep], None, 0.1)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))
    a = svm.objective(p, X, y, w, 0.3)
    b = svm.objective(p, X[rep], y[rep], None, 0.3)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(b))


# -- tree --------------------------------------------------------------------

def test_gini_helpers():
    assert weighted_gini([1, 1]) == 0.5
    assert weighted_gini([0, 3]) == 0.0
    assert split_impurity([2, 0], [0, 2]) == 0.0


def test_tree_single_split():
    t = train_tree([[0.0], [1.0], [2.0], [3.0]], [0, 0, 1, 1])
    assert t.n_nodes == 3
    assert t.feature[0] == 0 and t.threshold[0] == 1.5


def test_tree_weighted_split_moves():
    x = [0.0, 1.0, 2.0, 3.0]
    y = [0, 1, 1, 1]
    w = [1, 100, 1, 1]
    table = oracles.gini_split_table(x, y, w)
    best = min(table, key=lambda thr: (table[thr], thr))
    assert best == 0.5
    t = train_tree(np.array(x)[:, None], y, w)
    assert t.threshold[0] == 0.5


def test_tree_weight_flips_tie():
    x = [0.0, 1.0, 2.0, 3.0]
    y = [0, 1, 0, 1]
    eq = oracles.gini_split_table(x, y, [1, 1, 1, 1])
    assert eq[0.5] == eq[2.5] < eq[1.5]
    assert train_tree(np.array(x)[:, None], y).threshold[0] == 0.5
    hv = oracles.gini_split_table(x, y, [1, 1, 1, 10])
    assert min(hv, key=hv.get) == 2.5 and hv[2.5] == Fraction(4, 39)
    assert train_tree(np.array(x)[:, None], y, [1, 1, 1, 10]).threshold[0] == 2.5


def test_tree_feature_tie_lower_index():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
    t = train_tree(X, [0, 0, 1, 1])
    assert t.feature[0] == 0


def test_tree_scale_invariant_weights():
    X, y = blobs(11, shift=0.5)
    a = train_tree(X, y, np.full(len(y), 1.0))
    b = train_tree(X, y, np.full(len(y), 2.0))
    for f in ("feature", "threshold", "left", "right"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))
    np.testing.assert_array_equal(a.value * 2, b.value)


def test_tree_fits_training_set():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 2, 60)
    t = train_tree(X, y)
    np.testing.assert_array_equal(t.predict(X), y)
    assert np.all(t.value.sum(axis=1) > 0)
    assert np.isfinite(t.threshold).all()


def test_tree_depth_and_min_split():
    X, y = blobs(13, shift=0.3)
    assert train_tree(X, y, max_depth=1).depth() == 1
    assert train_tree(X, y, max_depth=0).n_nodes == 1
    big = train_tree(X, y, min_samples_split=len(y) + 1)
    assert big.n_nodes == 1
    assert big.score(X[:1])[0] == pytest.approx(0.5)


def test_tree_pure_leaf_scores_one():
    t = train_tree([[0.0], [1.0], [5.0]], [0, 1, 1])
    assert predict_score(t, [5.0]) == 1.0


def test_tree_every_leaf_reachable():
    rng = np.random.default_rng(14)
    X = rng.normal(size=(80, 2))
    y = rng.integers(0, 2, 80)
    t = train_tree(X, y)
    assert set(t.apply(X).tolist()) == set(np.flatnonzero(t.is_leaf_node).tolist())


# -- forest ------------------------------------------------------------------

def test_forest_identity_bootstrap_is_a_tree():
    X, y = blobs(15, d=4, shift=0.5)
    w = np.where(y == 1, 3.0, 1.0)
    f = train_forest(X, y, w, n_trees=1, bootstrap=False, max_features=None)
    assert f.trees[0].same_as(train_tree(X, y, w))


def test_forest_sqrt_features():
    X, y = blobs(16, d=5)
    assert train_forest(X, y, n_trees=2).features_per_split == 3


def test_forest_deterministic_and_parallel():
    X, y = blobs(17, d=3, shift=0.4)
    a = train_forest(X, y, n_trees=8, seed=5)
    b = train_forest(X, y, n_trees=8, seed=5)
    c = train_forest(X, y, n_trees=8, seed=5, n_jobs=2)
    assert same_model(a, b) and same_model(a, c)
    assert not same_model(a, train_forest(X, y, n_trees=8, seed=6))


def test_forest_training_accuracy_vs_tree():
    X, y = blobs(18, n=100, d=2, shift=2.5)
    tree_acc = (train_tree(X, y, max_depth=2).predict(X) == y).mean()
    forest_acc = (train_forest(X, y, n_trees=25, seed=1).predict(X) == y).mean()
    assert forest_acc >= tree_acc


def test_forest_bootstrap_carries_weights():
    X, y = blobs(19, n=30)
    w = np.where(y == 1, 7.0, 1.0)
    f = train_forest(X, y, w, n_trees=3, seed=2)
    for t in f.trees:
        root = t.value[0]
        # class-1 weight at the root is 7 per drawn positive
        assert root[1] % 7.0 == 0 and root.sum() > 0


# -- config / serialization --------------------------------------------------

@pytest.mark.parametrize("name", ["logreg", "svm", "tree", "forest"])
def test_model_json_round_trip(name):
    X, y = blobs(20, d=3)
    params = {"n_trees": 4} if name == "forest" else {}
    m = LearnerConfig(name, params).fit(X, y, np.where(y == 1, 2.5, 1.0), seed=9)
    doc = json.loads(json.dumps(model_to_dict(m)))
    back = model_from_dict(doc)
    assert same_model(m, back)
    np.testing.assert_array_equal(m.score(X), back.score(X))


@pytest.mark.parametrize("name", ["logreg", "svm", "tree", "forest"])
def test_all_ones_weights_bitwise(name):
    X, y = blobs(21, d=3, shift=0.6)
    cfg = LearnerConfig(name, {"n_trees": 5} if name == "forest" else {})
    assert same_model(cfg.fit(X, y, None, seed=1), cfg.fit(X, y, np.ones(len(y)), seed=1))


def test_learner_config_validation():
    with pytest.raises(ValidationError):
        LearnerConfig("knn")
    with pytest.raises(ValidationError):
        LearnerConfig("svm", {"l2": 1.0})
    assert LearnerConfig.from_dict({"name": "tree", "params": {"max_depth": 3}}).params == {"max_depth": 3}


def test_model_doc_validation():
    with pytest.raises(ValidationError):
        model_from_dict({"format": "other"})
    with pytest.raises(ValidationError):
        model_from_dict({"format": "icost-model", "version": 99})
    with pytest.raises(ValidationError):
        model_from_dict({"format": "icost-model", "version": 1, "kind": "knn"})
    assert isinstance(model_from_dict(model_to_dict(TreeModel(
        np.array([-1]), np.array([0.0]), np.array([-1]), np.array([-1]),
        np.array([[1.0, 1.0]]), 2))), TreeModel)
