import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timetoopen.data import make_survival_array
from timetoopen.nonparametric import (StepSurvivalCurve, breslow_baseline, kaplan_meier,
                                      log_rank_test)

from conftest import make_dataset


def exhaustive_logrank_p(time, event, n_a):
    """Permutation p-value of the log-rank statistic over every split of the pooled rows.

    Independent of the package: scores and variances are rebuilt from
    at-risk indicator matrices for all ``C(n, n_a)`` group assignments.
    """
    time, event = np.asarray(time, float), np.asarray(event, bool)
    n = time.size
    ev_times = np.unique(time[event])
    at_risk = (time[None, :] >= ev_times[:, None]).astype(float)       # J x n
    fails = ((time[None, :] == ev_times[:, None]) & event[None, :]).astype(float)
    n_j, d_j = at_risk.sum(1), fails.sum(1)
    combos = np.array(list(itertools.combinations(range(n), n_a)))
    G = np.zeros((combos.shape[0], n))
    G[np.arange(combos.shape[0])[:, None], combos] = 1.0
    n_aj = G @ at_risk.T
    d_aj = G @ fails.T
    u = (d_aj - d_j * n_aj / n_j).sum(1)
    with np.errstate(invalid="ignore", divide="ignore"):
        v = np.where(n_j > 1, d_j * (n_aj / n_j) * (1 - n_aj / n_j) * (n_j - d_j) / (n_j - 1), 0)
    v = v.sum(1)
    stat = np.where(v > 0, u * u / np.where(v > 0, v, 1), 0.0)
    observed = stat[0]  # first combination is rows 0..n_a-1
    return float(np.mean(stat >= observed * (1 - 1e-9)))


def permutation_instance(seed, n=20):
    rng = np.random.default_rng(seed)
    half = n // 2
    t = rng.exponential(1.0, n) * np.r_[np.ones(half), np.full(n - half, rng.uniform(0.3, 1.5))]
    c = rng.uniform(0.5, 3.0, n)
    return np.minimum(t, c).round(3), t < c


class TestKaplanMeier:
    def test_three_events(self):
        km = kaplan_meier(make_dataset([1, 2, 3], [1, 1, 1]))
        # product-limit factors (1 - d/n), multiplied in event order
        assert km(1.5) == (1 - 1 / 3)
        assert km(2.5) == (1 - 1 / 3) * (1 - 1 / 2)
        assert km(3) == 0.0
        assert km(2.5) == pytest.approx(1 / 3, abs=1e-15)

    def test_mixed_censoring(self):
        km = kaplan_meier(make_survival_array([1, 0, 1], [1.0, 2.0, 3.0]))
        assert km(1.5) == (1 - 1 / 3)
        assert km(2.5) == (1 - 1 / 3)
        assert km(3) == (1 - 1 / 3) * (1 - 1 / 1) == 0.0

    def test_all_censored_warns(self):
        with pytest.warns(RuntimeWarning):
            km = kaplan_meier(make_dataset([5, 5], [0, 0]))
        assert km(100) == 1.0

    def test_right_continuous(self):
        km = kaplan_meier(make_dataset([1, 2, 3], [1, 1, 1]))
        assert km(1) == (1 - 1 / 3) and km(0.999) == 1.0

    def test_array_and_dataset_agree(self):
        ds = make_dataset([1, 2, 2, 4], [1, 1, 1, 0], window=4)
        a = kaplan_meier(ds.y)
        b = kaplan_meier(ds)
        np.testing.assert_array_equal(a.survival, b.survival)


class TestBreslow:
    def test_hand_increments(self):
        h = breslow_baseline(make_dataset([1, 2], [1, 1]), np.ones(2))
        np.testing.assert_allclose(h.cum_hazard, [0.5, 1.5], rtol=0, atol=0)

    def test_nelson_aalen(self):
        y = make_survival_array([1, 1, 1, 0, 1], [1.0, 2.0, 2.0, 3.0, 5.0])
        h = breslow_baseline(y, np.ones(5))
        # d_j / n_j at t = 1, 2, 5
        np.testing.assert_array_equal(h.cum_hazard, np.cumsum([1 / 5, 2 / 4, 1 / 1]))

    def test_doubling_psi_halves(self):
        ds = make_survival_array([1, 0, 1, 1], [1.0, 2.0, 4.0, 7.0])
        psi = np.array([0.5, 1.5, 2.0, 0.7])
        a = breslow_baseline(ds, psi)
        b = breslow_baseline(ds, 2 * psi)
        np.testing.assert_allclose(b.cum_hazard, a.cum_hazard / 2, rtol=1e-15)

    def test_nonpositive_hazard(self):
        with pytest.raises(ValueError):
            breslow_baseline(make_dataset([1, 2], [1, 1]), np.array([1.0, 0.0]))

    def test_survival_is_exp_minus_hazard(self):
        h = breslow_baseline(make_dataset([1, 2, 3], [1, 1, 1]), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(h.survival, np.exp(-h.cum_hazard))


class TestLogRank:
    def test_identical_groups(self):
        ds = make_dataset([1, 2, 3, 5], [1, 1, 1, 0], window=5)
        stat, p = log_rank_test(ds, ds)
        assert stat == 0.0 and p == 1.0

    def test_strong_separation(self):
        a = make_dataset(np.ones(20), np.ones(20), window=10)
        b = make_dataset(np.full(20, 10.0), np.zeros(20), window=10)
        stat, p = log_rank_test(a, b)
        assert stat > 10 and p < 0.01

    def test_one_group_eventless(self):
        a = make_dataset([1, 2, 3], [1, 1, 1], window=10)
        b = make_dataset([10, 10], [0, 0], window=10)
        stat, p = log_rank_test(a, b)
        assert np.isfinite(stat) and 0 <= p <= 1

    def test_both_eventless(self):
        a = make_dataset([10, 10], [0, 0], window=10)
        with pytest.raises(ValueError):
            log_rank_test(a, a)

    def test_window_mismatch(self):
        with pytest.raises(ValueError):
            log_rank_test(make_dataset([1, 5], [1, 0]), make_dataset([1, 6], [1, 0]))

    @pytest.mark.parametrize("seed", range(2))
    def test_permutation_oracle(self, seed):
        t, e = permutation_instance(seed, n=20)
        a = make_survival_array(e[:10], t[:10])
        b = make_survival_array(e[10:], t[10:])
        _, p = log_rank_test(a, b)
        assert abs(p - exhaustive_logrank_p(t, e, 10)) <= 0.02


surv_rows = st.lists(st.tuples(st.integers(1, 15), st.booleans()), min_size=1, max_size=25)


@settings(max_examples=60, deadline=None)
@given(surv_rows, st.randoms(use_true_random=False))
def test_km_order_invariant(rows, rnd):
    t = np.array([r[0] for r in rows], float)
    e = np.array([r[1] for r in rows])
    perm = list(range(len(rows)))
    rnd.shuffle(perm)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = kaplan_meier(make_survival_array(e, t))
        b = kaplan_meier(make_survival_array(e[perm], t[perm]))
    np.testing.assert_array_equal(a.survival, b.survival)
    np.testing.assert_array_equal(a.times, b.times)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 15), min_size=1, max_size=25))
def test_km_without_censoring_is_empirical(times):
    t = np.array(times, float)
    km = kaplan_meier(make_survival_array(np.ones(t.size, bool), t))
    for s in np.unique(t):
        assert km(s) == pytest.approx(np.mean(t > s), abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(surv_rows, surv_rows)
def test_log_rank_symmetric(rows_a, rows_b):
    ta = np.array([r[0] for r in rows_a], float)
    ea = np.array([r[1] for r in rows_a])
    tb = np.array([r[0] for r in rows_b], float)
    eb = np.array([r[1] for r in rows_b])
    if not (ea.any() or eb.any()):
        return
    a, b = make_survival_array(ea, ta), make_survival_array(eb, tb)
    s1, p1 = log_rank_test(a, b)
    s2, p2 = log_rank_test(b, a)
    assert s1 == pytest.approx(s2, rel=1e-12, abs=1e-12)
    assert p1 == pytest.approx(p2, rel=1e-9, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(surv_rows, st.lists(st.floats(0.1, 10), min_size=25, max_size=25))
def test_breslow_permutation_invariant(rows, psi):
    t = np.array([r[0] for r in rows], float)
    e = np.array([r[1] for r in rows])
    if not e.any():
        return
    psi = np.array(psi[: t.size])
    perm = np.arange(t.size)[::-1]
    a = breslow_baseline(make_survival_array(e, t), psi)
    b = breslow_baseline(make_survival_array(e[perm], t[perm]), psi[perm])
    np.testing.assert_allclose(a.cum_hazard, b.cum_hazard, rtol=1e-12)
    assert np.all(np.diff(np.r_[0.0, a.cum_hazard]) > 0)


def test_curve_rejects_increasing_survival():
    with pytest.raises(ValueError):
        StepSurvivalCurve(np.array([1.0, 2.0]), np.array([0.5, 0.6]), np.array([0.7, 0.5]))
