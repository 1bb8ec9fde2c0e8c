import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timetoopen.cox import (ConvergenceError, CoxPHElasticNet, partial_ll_gradient,
                            partial_log_likelihood, schoenfeld_residuals)
from timetoopen.data import apply_censoring, make_survival_array
from timetoopen.simulate import generate

from conftest import make_dataset, ph_config


def brute_pll(X, event, time, beta):
    """Breslow partial log-likelihood by explicit loops over event rows."""
    total = 0.0
    for i in range(len(time)):
        if event[i]:
            at_risk = [l for l in range(len(time)) if time[l] >= time[i]]
            total += X[i] @ beta - math.log(sum(math.exp(X[l] @ beta) for l in at_risk))
    return total


def central_difference(f, x, h=1e-5):
    out = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        out[j] = (f(x + e) - f(x - e)) / (2 * h)
    return out


def random_instance(rng, n, k):
    X = rng.normal(size=(n, k))
    time = rng.integers(1, max(2, n // 2), size=n).astype(float)  # ties on purpose
    event = rng.random(n) < 0.7
    event[0] = True
    return X, make_survival_array(event, time), rng.normal(scale=0.5, size=k)


class TestPartialLikelihood:
    def test_beta_zero_three_events(self):
        ds = make_dataset([1, 2, 3], [1, 1, 1], X=[[5.0], [-1.0], [2.0]])
        assert partial_log_likelihood(ds, [0.0]) == -(math.log(3) + math.log(2) + math.log(1))
        assert partial_log_likelihood(ds, [0.0]) == pytest.approx(-math.log(6), abs=1e-15)

    def test_two_rows(self):
        ds = make_dataset([1, 2], [1, 1], X=[[1.0], [0.0]])
        assert partial_log_likelihood(ds, [0.0]) == -math.log(2)

    def test_extra_censored_row_lowers(self):
        X = np.array([[0.3], [-0.2]])
        base = partial_log_likelihood((X, make_survival_array([1, 1], [1.0, 2.0])), [0.4])
        X3 = np.vstack([X, [[1.0]]])
        more = partial_log_likelihood((X3, make_survival_array([1, 1, 0], [1.0, 2.0, 3.0])),
                                      [0.4])
        assert more < base

    def test_hand_gradient(self):
        ds = make_dataset([1, 2], [1, 1], X=[[1.0], [0.0]])
        assert partial_ll_gradient(ds, [0.0])[0] == 0.5

    def test_rejects_nonfinite_beta(self):
        ds = make_dataset([1, 2], [1, 1], X=[[1.0], [0.0]])
        with pytest.raises(ValueError):
            partial_log_likelihood(ds, [np.nan])

    def test_large_scores_stay_finite(self):
        X = np.array([[800.0], [0.0], [-800.0]])
        value = partial_log_likelihood((X, make_survival_array([1, 1, 1], [1.0, 2.0, 3.0])),
                                       [1.0])
        assert np.isfinite(value)

    @pytest.mark.parametrize("seed", range(5))
    def test_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        X, y, beta = random_instance(rng, 30, 3)
        assert partial_log_likelihood((X, y), beta) == pytest.approx(
            brute_pll(X, y["event"], y["time"], beta), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 60), st.integers(1, 4))
def test_gradient_finite_differences(seed, n, k):
    rng = np.random.default_rng(seed)
    X, y, beta = random_instance(rng, n, k)
    grad = partial_ll_gradient((X, y), beta)
    fd = central_difference(lambda b: partial_log_likelihood((X, y), b), beta)
    scale = max(np.max(np.abs(grad)), 1e-3)
    assert np.max(np.abs(grad - fd)) / scale <= 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.floats(-50, 50))
def test_shift_invariance(seed, shift):
    rng = np.random.default_rng(seed)
    X, y, beta = random_instance(rng, 25, 2)
    a = partial_log_likelihood((X, y), beta)
    b = partial_log_likelihood((X + shift, y), beta)
    assert b == pytest.approx(a, rel=1e-9, abs=1e-9)


@pytest.fixture(scope="module")
def ph_data():
    log, _ = generate(ph_config(1500, seed=11))
    return apply_censoring(log, 720)


class TestFit:
    def test_gradient_vanishes_at_mle(self, ph_data):
        model = CoxPHElasticNet().fit(ph_data.X, ph_data.y)
        grad = partial_ll_gradient(ph_data, model.coef_) * model.scale_
        assert np.max(np.abs(grad)) <= 1e-8

    def test_sign(self):
        rng = np.random.default_rng(0)
        x = np.r_[np.ones(50), np.zeros(50)]
        t = np.where(x == 1, rng.exponential(1, 100), rng.exponential(3, 100)) + 0.01
        model = CoxPHElasticNet().fit(x[:, None], make_survival_array(np.ones(100, bool), t))
        assert model.coef_[0] > 0

    def test_large_penalty_gives_zero(self, ph_data):
        model = CoxPHElasticNet(penalty=1e6, l1_ratio=1.0).fit(ph_data.X, ph_data.y)
        assert np.all(model.coef_ == 0.0)

    def test_objective_path_non_decreasing(self, ph_data):
        model = CoxPHElasticNet(penalty=5.0, l1_ratio=0.5).fit(ph_data.X, ph_data.y)
        assert np.all(np.diff(model.objective_path_) >= 0)

    def test_convergence_error(self, ph_data):
        with pytest.raises(ConvergenceError) as info:
            CoxPHElasticNet(max_iter=1, tol=0.0, gtol=0.0).fit(ph_data.X, ph_data.y)
        assert info.value.coef.shape == (2,)
        assert info.value.grad_norm > 0

    def test_needs_an_event(self):
        with pytest.raises(ValueError):
            CoxPHElasticNet().fit(np.zeros((3, 1)), make_survival_array([0, 0, 0], [5.0] * 3))

    def test_bad_params(self):
        with pytest.raises(ValueError):
            CoxPHElasticNet(l1_ratio=2).fit(np.zeros((2, 1)), make_survival_array([1, 1], [1, 2]))

    def test_ranking_invariant_to_standardisation(self, ph_data):
        model = CoxPHElasticNet().fit(ph_data.X, ph_data.y)
        raw = ph_data.X @ model.coef_
        np.testing.assert_array_equal(np.argsort(model.predict(ph_data.X), kind="stable"),
                                      np.argsort(raw, kind="stable"))

    def test_get_params_round_trip(self):
        model = CoxPHElasticNet(penalty=0.3, l1_ratio=0.2)
        assert CoxPHElasticNet(**model.get_params()).get_params() == model.get_params()


class TestSchoenfeld:
    def test_hand_residual(self):
        ds = make_dataset([1, 2], [1, 1], X=[[1.0], [0.0]])
        model = _fixed_coef([0.0])
        with pytest.warns(RuntimeWarning):
            report = schoenfeld_residuals(ds, model)
        assert report.residuals[0, 0] == 0.5
        assert report.insufficient and not report.passed

    def test_residual_sums_vanish(self, ph_data):
        model = CoxPHElasticNet().fit(ph_data.X, ph_data.y)
        report = schoenfeld_residuals(ph_data, model)
        sums = np.abs(report.residuals.sum(axis=0))
        assert np.all(sums <= 1e-6 * np.abs(report.residuals).sum(axis=0))

    def test_residuals_only_for_events(self, ph_data):
        model = CoxPHElasticNet().fit(ph_data.X, ph_data.y)
        report = schoenfeld_residuals(ph_data, model)
        assert report.residuals.shape == (ph_data.n_events, 2)

    def test_proportional_data_passes(self, ph_data):
        model = CoxPHElasticNet().fit(ph_data.X, ph_data.y)
        report = schoenfeld_residuals(ph_data, model)
        assert report.passed, report.p_values

    def test_csv(self, ph_data, tmp_path):
        model = CoxPHElasticNet().fit(ph_data.X, ph_data.y)
        report = schoenfeld_residuals(ph_data, model)
        report.to_csv(tmp_path / "r.csv")
        header = (tmp_path / "r.csv").read_text().splitlines()[0]
        assert header == "time,residual_tenure,residual_mobile_share"


def _fixed_coef(coef):
    model = CoxPHElasticNet()
    model.coef_ = np.asarray(coef, dtype=float)
    return model
