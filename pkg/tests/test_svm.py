import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import box_qp
from vgrank.svm import (
    NotPSDWarning,
    PrecomputedSVC,
    dual_objective,
    platt_apply,
    platt_fit,
    primal_objective,
    smo,
)


def linear_problem(rng, n, dim=None, separable=False):
    dim = dim or n + 2
    X = rng.normal(size=(n, dim))
    if separable:
        w = rng.normal(size=dim)
        y = np.where(X @ w >= 0, 1, -1)
        X += 0.5 * np.outer(y, w) / np.linalg.norm(w)
    else:
        y = rng.choice([-1, 1], size=n)
    if len(set(y)) == 1:
        y[0] = -y[0]
    return X @ X.T, y


def test_two_points():
    K = np.array([[1.0, 0.0], [0.0, 1.0]])
    y = np.array([1, -1])
    model = PrecomputedSVC(C=10.0).fit(K, y)
    assert sorted(model.support_) == [0, 1]
    margins = y * model.decision_function(K)
    assert margins.min() >= 1 - 1e-6
    # equidistant query
    assert abs(model.decision_function([[0.5, 0.5]])[0]) < 1e-6


def test_separable_line():
    x = np.concatenate([np.linspace(-3, -0.5, 10), np.linspace(0.5, 3, 10)])
    y = np.where(x > 0, 1, -1)
    K = np.outer(x, x) + 1.0
    model = PrecomputedSVC(C=100.0).fit(K, y)
    assert np.array_equal(model.predict(K), y)


def test_training_instance_sign():
    rng = np.random.default_rng(1)
    K, y = linear_problem(rng, 30, dim=5, separable=True)
    model = PrecomputedSVC(C=1e3).fit(K, y)
    assert np.array_equal(model.predict(K), y)


@pytest.mark.parametrize("seed", range(50))
def test_small_dual_matches_exhaustive_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    K, y = linear_problem(rng, n)
    C = float(rng.choice([0.1, 1.0, 10.0]))
    alpha, _, _ = smo(K, y, C=C)
    best, _ = box_qp(K, y, C)
    # the oracle minimises the negated dual
    assert abs(-dual_objective(K, y, alpha) - best) <= 1e-4


@given(st.integers(0, 2**32 - 1), st.sampled_from([0.1, 1.0, 10.0]))
def test_feasibility_and_gap(seed, C):
    rng = np.random.default_rng(seed)
    K, y = linear_problem(rng, int(rng.integers(4, 40)), dim=6)
    alpha, b, _ = smo(K, y, C=C)
    assert abs(alpha @ y) < 1e-8
    assert alpha.min() >= 0 and alpha.max() <= C + 1e-12
    dual = dual_objective(K, y, alpha)
    assert primal_objective(K, y, alpha, b, C) - dual <= 1e-3 * (1 + abs(dual))


@given(st.integers(0, 2**32 - 1))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(25, 4))
    y = rng.choice([-1, 1], size=20)
    y[:2] = [-1, 1]
    K = X[:20] @ X[:20].T
    q = X[20:] @ X[:20].T
    perm = rng.permutation(20)
    a = PrecomputedSVC(tol=1e-8).fit(K, y)
    b = PrecomputedSVC(tol=1e-8).fit(K[np.ix_(perm, perm)], y[perm])
    np.testing.assert_allclose(a.decision_function(q), b.decision_function(q[:, perm]),
                               rtol=1e-4, atol=1e-4)


def test_missing_kernel_columns():
    rng = np.random.default_rng(0)
    K, y = linear_problem(rng, 8)
    model = PrecomputedSVC().fit(K, y)
    with pytest.raises(ValueError, match="8 training instances"):
        model.decision_function(K[:, :5])


def test_single_class_is_degenerate():
    K = np.eye(4)
    pos = PrecomputedSVC().fit(K, [1, 1, 1, 1])
    neg = PrecomputedSVC().fit(K, [-1, -1, -1, -1])
    assert pos.degenerate_ and neg.degenerate_
    assert np.all(pos.predict_proba(K)[:, 1] == 1.0)
    assert np.all(neg.predict_proba(K)[:, 1] == 0.0)


def test_non_psd_warns_and_still_trains():
    K = np.array([[1.0, 2.0], [2.0, 1.0]])
    with pytest.warns(NotPSDWarning):
        model = PrecomputedSVC().fit(K, [1, -1])
    assert np.isfinite(model.intercept_)


def test_platt_symmetric():
    f = np.array([1.0] * 10 + [-1.0] * 10)
    y = np.array([1] * 10 + [-1] * 10)
    A, B = platt_fit(f, y)
    p = platt_apply(A, B, np.array([1.0, 0.0, -1.0]))
    assert p[0] > 0.5 > p[2]
    assert abs(p[1] - 0.5) < 1e-6
    assert A < 0


@given(st.integers(0, 2**32 - 1))
def test_platt_monotone_and_open_interval(seed):
    rng = np.random.default_rng(seed)
    y = rng.choice([-1, 1], size=30)
    y[:2] = [-1, 1]
    f = y * rng.uniform(0.1, 3, size=30) + rng.normal(scale=0.5, size=30)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        A, B = platt_fit(f, y)
    grid = np.linspace(-50, 50, 201)
    p = platt_apply(A, B, grid)
    assert np.all((p > 0) & (p < 1))
    assert np.all(np.diff(p) >= 0) if A < 0 else np.all(np.diff(p) <= 0)


def test_persistence_round_trip():
    rng = np.random.default_rng(3)
    K, y = linear_problem(rng, 12, dim=3)
    model = PrecomputedSVC().fit(K, y)
    back = PrecomputedSVC.from_dict(model.to_dict())
    np.testing.assert_array_equal(back.predict_proba(K), model.predict_proba(K))
