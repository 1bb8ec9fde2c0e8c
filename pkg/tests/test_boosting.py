import numpy as np
import pytest

from timetoopen._risk import RiskSets
from timetoopen.boosting import CoxBoost, RegressionTree, _loglik_and_gradient, relative_hazard
from timetoopen.cox import partial_log_likelihood
from timetoopen.data import make_survival_array
from timetoopen.nonparametric import breslow_baseline


def two_group_data(n, seed, ratio=3.0, rate=0.01, window=720.0):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    t = rng.exponential(1.0 / (rate * np.where(x >= 0, ratio, 1.0)))
    event = t < window
    return x[:, None], make_survival_array(event, np.where(event, t, window))


@pytest.fixture(scope="module")
def small():
    X, y = two_group_data(600, 1)
    rng = np.random.default_rng(2)
    return np.column_stack([X, rng.normal(size=600)]), y


def test_zero_trees_is_null_model(small):
    X, y = small
    model = CoxBoost(n_estimators=0).fit(X, y)
    np.testing.assert_array_equal(model.predict(X), 0.0)
    na = breslow_baseline(y, np.ones(len(y)))
    np.testing.assert_array_equal(model.baseline_.cum_hazard, na.cum_hazard)
    np.testing.assert_array_equal(relative_hazard(model, X), 1.0)


def test_pseudo_residuals_are_score_gradient(small):
    X, y = small
    rs = RiskSets(y["time"], y["event"])
    rng = np.random.default_rng(0)
    score = rng.normal(scale=0.3, size=len(y))
    value, grad = _loglik_and_gradient(rs, score[rs.order])
    # a score column with unit coefficient gives the same partial likelihood
    assert value == pytest.approx(partial_log_likelihood((score[:, None], y), [1.0]), rel=1e-12)
    h = 1e-6
    for i in rng.choice(len(y), 5, replace=False):
        e = np.zeros(len(y))
        e[i] = h
        up = _loglik_and_gradient(rs, (score + e)[rs.order])[0]
        down = _loglik_and_gradient(rs, (score - e)[rs.order])[0]
        pos = int(np.flatnonzero(rs.order == i)[0])
        assert grad[pos] == pytest.approx((up - down) / (2 * h), rel=1e-5, abs=1e-7)


def test_training_likelihood_non_decreasing(small):
    X, y = small
    model = CoxBoost(n_estimators=60).fit(X, y)
    assert np.all(np.diff(model.train_score_) >= 0)


def test_deterministic(small):
    X, y = small
    a = CoxBoost(n_estimators=20).fit(X, y).predict(X)
    b = CoxBoost(n_estimators=20).fit(X, y).predict(X)
    np.testing.assert_array_equal(a, b)


def test_monotone_transform_invariance(small):
    X, y = small
    Xt = X.copy()
    Xt[:, 0] = np.exp(2 * X[:, 0]) + 5
    a = CoxBoost(n_estimators=25).fit(X, y).predict(X)
    b = CoxBoost(n_estimators=25).fit(Xt, y).predict(Xt)
    np.testing.assert_array_equal(a, b)


def test_constant_leaf_shift(small):
    X, y = small
    model = CoxBoost(n_estimators=10, learning_rate=0.1).fit(X, y)
    before = relative_hazard(model, X)
    c = 0.7
    for tree in model.estimators_:
        tree.value = tree.value + c
    after = relative_hazard(model, X)
    np.testing.assert_allclose(after, before * np.exp(c * 0.1 * 10), rtol=1e-12)


def test_output_positive(small):
    X, y = small
    model = CoxBoost(n_estimators=10).fit(X, y)
    assert np.all(relative_hazard(model, X * 1e3) > 0)


def test_degenerate_features_skip_stages():
    X = np.ones((40, 2))
    y = make_survival_array(np.ones(40, bool), np.arange(1.0, 41.0))
    with pytest.warns(RuntimeWarning, match="no admissible split"):
        model = CoxBoost(n_estimators=3).fit(X, y)
    assert model.estimators_ == []
    np.testing.assert_array_equal(model.predict(X), 0.0)


def test_tree_count_bounded(small):
    X, y = small
    assert len(CoxBoost(n_estimators=7).fit(X, y).estimators_) <= 7


@pytest.mark.parametrize("bad", [dict(learning_rate=0), dict(learning_rate=1.5),
                                 dict(min_samples_leaf=0), dict(max_depth=0),
                                 dict(n_estimators=-1), dict(n_bins=0)])
def test_parameter_checks(small, bad):
    X, y = small
    with pytest.raises(ValueError):
        CoxBoost(**bad).fit(X, y)


def test_wrong_width(small):
    X, y = small
    model = CoxBoost(n_estimators=2).fit(X, y)
    with pytest.raises(ValueError):
        model.predict(X[:, :1])


def test_tree_round_trip():
    tree = RegressionTree(np.array([0, -1, -1]), np.array([0.5, 0, 0]), np.array([1, -1, -1]),
                          np.array([2, -1, -1]), np.array([0.0, -1.0, 2.0]))
    back = RegressionTree.from_dict(tree.to_dict())
    X = np.array([[0.1], [0.5], [0.9]])
    np.testing.assert_array_equal(back.predict(X), [-1.0, -1.0, 2.0])
