"""Linear Cox proportional hazards with an elastic-net penalty.

The relative hazard is ``exp(X @ coef)``; ties use the Breslow convention.
Also holds the Schoenfeld-residual check of the proportionality assumption.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._risk import RiskSets
from ._solver import ConvergenceError, penalized_newton
from .base import (SurvivalPredictionMixin, check_X_y_survival, fit_standardizer,
                   infer_censoring_window)
from .data import SurvivalDataset, make_survival_array
from .nonparametric import StepSurvivalCurve, breslow_increments, kaplan_meier

__all__ = [
    "CoxPartialLikelihood",
    "CoxPHElasticNet",
    "ConvergenceError",
    "ProportionalityReport",
    "partial_log_likelihood",
    "partial_ll_gradient",
    "schoenfeld_residuals",
]


class CoxPartialLikelihood:
    """Breslow partial log-likelihood of ``(X, event, time)`` as a function of ``coef``.

    ``sample_weight`` multiplies every row both as an event and inside the
    risk-set sums.
    """

    def __init__(self, X, event, time, sample_weight=None):
        self.risk = RiskSets(time, event, sample_weight)
        self.X = np.ascontiguousarray(np.asarray(X, dtype=np.float64)[self.risk.order])
        self._sum_event_x()

    def _sum_event_x(self):
        ev = self.risk.event_rows
        self._event_x = self.risk.weight[ev] @ self.X[ev]

    def set_weights(self, sample_weight):
        """Swap row weights without re-sorting the data."""
        self.risk.set_weight(sample_weight)
        self._sum_event_x()

    def _moments(self, eta, order):
        rs = self.risk
        shift = eta.max()
        r = rs.weight * np.exp(eta - shift)
        s0 = rs.at_risk(r)
        ev = rs.event_rows
        d = rs.n_events
        # risk sets far below the global maximum underflow; shift those locally
        lost = np.flatnonzero(s0 == 0)
        log_s0 = np.log(np.where(s0 > 0, s0, 1.0)) + shift
        for j in lost:
            tail = eta[rs.start[j]:]
            m = tail.max()
            log_s0[j] = m + np.log(rs.weight[rs.start[j]:] @ np.exp(tail - m))
        value = rs.weight[ev] @ eta[ev] - d @ log_s0
        if order == 0:
            return value, None, None, s0, None
        rx = r[:, None] * self.X
        s1 = rs.at_risk(rx)
        with np.errstate(invalid="ignore", divide="ignore"):
            mean = s1 / s0[:, None]
        for j in lost:
            p = rs.weight[rs.start[j]:] * np.exp(eta[rs.start[j]:] - log_s0[j])
            mean[j] = p @ self.X[rs.start[j]:]
        grad = self._event_x - d @ mean
        if order == 1:
            return value, grad, None, s0, mean
        # sum_j d_j S2_j / S0_j, regrouped per row to avoid n x k x k arrays
        with np.errstate(divide="ignore"):
            c = rs.accumulate(np.where(s0 > 0, d / np.where(s0 > 0, s0, 1.0), 0.0))
        second = self.X.T @ ((r * c)[:, None] * self.X)
        for j in lost:
            p = rs.weight[rs.start[j]:] * np.exp(eta[rs.start[j]:] - log_s0[j])
            Xj = self.X[rs.start[j]:]
            second += d[j] * (Xj.T * p) @ Xj
        hess = -(second - mean.T @ (d[:, None] * mean))
        return value, grad, hess, s0, mean

    def __call__(self, coef, order=2):
        eta = self.X @ coef
        value, grad, hess, _, _ = self._moments(eta, order)
        if order == 0:
            return value
        if order == 1:
            return value, grad
        return value, grad, hess

    def risk_set_means(self, coef):
        """Risk-weighted feature means ``a(t_j)`` at every distinct event time."""
        return self._moments(self.X @ coef, 1)[4]

    def baseline(self, coef) -> StepSurvivalCurve:
        """Breslow cumulative baseline hazard at ``coef``."""
        increments = breslow_increments(self.risk, self.X @ coef)
        return StepSurvivalCurve.from_cum_hazard(self.risk.event_times, np.cumsum(increments))


def _unpack(data):
    if isinstance(data, SurvivalDataset):
        return data.X, data.event, data.duration
    X, y = data
    return check_X_y_survival(X, y)


def partial_log_likelihood(data, coef) -> float:
    """Cox partial log-likelihood.

    Parameters
    ----------
    data : SurvivalDataset or tuple ``(X, y)``
    coef : array-like, shape (n_features,)
    """
    X, event, time = _unpack(data)
    coef = np.asarray(coef, dtype=np.float64)
    if not np.all(np.isfinite(coef)):
        raise ValueError("coef must be finite")
    return float(CoxPartialLikelihood(X, event, time)(coef, 0))


def partial_ll_gradient(data, coef) -> np.ndarray:
    """Gradient of :func:`partial_log_likelihood`: ``sum over events of X_i - a(t_i)``."""
    X, event, time = _unpack(data)
    coef = np.asarray(coef, dtype=np.float64)
    if not np.all(np.isfinite(coef)):
        raise ValueError("coef must be finite")
    return CoxPartialLikelihood(X, event, time)(coef, 1)[1]


class CoxPHElasticNet(SurvivalPredictionMixin, BaseEstimator):
    """Cox proportional hazards model fitted by penalised Newton-Raphson.

    Maximises ``pl(coef) - penalty * (l1_ratio * |coef|_1 + (1 - l1_ratio) * |coef|^2 / 2)``
    over coefficients of the standardised features. The L1 part is handled
    with a soft-thresholded (proximal) Newton step.

    Parameters
    ----------
    penalty : float, default 0.0
        Overall regularisation strength (lambda).
    l1_ratio : float, default 0.0
        Share of the L1 term (alpha), in [0, 1].
    max_iter : int, default 100
    tol : float, default 1e-9
        Relative change of the objective that ends the iterations.
    gtol : float, default 1e-8
        Infinity norm of the gradient that ends the iterations.
    censoring_window : float, optional
        Defaults to the time of the censored rows.

    Attributes
    ----------
    coef_ : ndarray, shape (n_features,)
        Coefficients on the original feature scale.
    coef_std_ : ndarray, shape (n_features,)
        Coefficients on the standardised scale.
    mean_, scale_ : ndarray
        Standardisation learned from the training data.
    baseline_ : StepSurvivalCurve
        Breslow baseline for centred features.
    loglik_ : float
        Penalised objective at the solution.
    n_iter_ : int
    """

    def __init__(self, penalty=0.0, l1_ratio=0.0, max_iter=100, tol=1e-9, gtol=1e-8,
                 censoring_window=None):
        self.penalty = penalty
        self.l1_ratio = l1_ratio
        self.max_iter = max_iter
        self.tol = tol
        self.gtol = gtol
        self.censoring_window = censoring_window

    def _check_params(self):
        if self.penalty < 0:
            raise ValueError(f"penalty must be non-negative, got {self.penalty}")
        if not 0 <= self.l1_ratio <= 1:
            raise ValueError(f"l1_ratio must be within [0, 1], got {self.l1_ratio}")

    def fit(self, X, y=None, sample_weight=None):
        self._check_params()
        X, event, time = check_X_y_survival(X, y)
        if not event.any():
            raise ValueError("at least one event is required to fit a Cox model")
        self.n_features_in_ = X.shape[1]
        self.censoring_window_ = infer_censoring_window(event, time, self.censoring_window)
        self.mean_, self.scale_ = fit_standardizer(X)
        Xs = (X - self.mean_) / self.scale_
        lik = CoxPartialLikelihood(Xs, event, time, sample_weight)
        coef, value, n_iter, history = penalized_newton(
            lik, np.zeros(X.shape[1]), self.penalty, self.l1_ratio,
            max_iter=self.max_iter, tol=self.tol, gtol=self.gtol,
        )
        self.coef_std_ = coef
        self.coef_ = coef / self.scale_
        self.loglik_ = value
        self.objective_path_ = np.asarray(history)
        self.n_iter_ = n_iter
        self.baseline_ = lik.baseline(coef)
        return self

    def predict(self, X):
        """Log relative hazard of every row (centred at the training mean)."""
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=np.float64)
        return ((X - self.mean_) / self.scale_) @ self.coef_std_


@dataclass(frozen=True)
class ProportionalityReport:
    """Schoenfeld residuals per event row and feature with a time-trend test.

    ``residuals[i, j]`` belongs to the i-th event (in ``times`` order) and
    feature ``j``. ``p_values`` come from the correlation between each
    feature's residuals and Kaplan-Meier transformed time.
    """

    feature_names: tuple[str, ...]
    times: np.ndarray
    residuals: np.ndarray
    p_values: np.ndarray
    alpha: float
    insufficient: bool = False

    @property
    def passed(self) -> bool:
        return (not self.insufficient) and bool(np.all(self.p_values > self.alpha))

    def feature_passed(self) -> dict[str, bool]:
        return {n: bool(p > self.alpha) for n, p in zip(self.feature_names, self.p_values)}

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["time"] + [f"residual_{n}" for n in self.feature_names])
            for t, row in zip(self.times, self.residuals):
                writer.writerow([repr(float(t))] + [repr(float(v)) for v in row])


def _trend_p_value(residual, transformed_time):
    if np.ptp(residual) == 0 or np.ptp(transformed_time) == 0:
        return 1.0
    return float(stats.pearsonr(residual, transformed_time).pvalue)


def schoenfeld_residuals(data, model, alpha=0.05, feature_names=None) -> ProportionalityReport:
    """Schoenfeld residuals ``X_ij - a_ij`` at the fitted coefficients.

    Parameters
    ----------
    data : SurvivalDataset or tuple ``(X, y)``
    model : fitted estimator with ``coef_`` on the original feature scale
    alpha : float, default 0.05
        Significance level of the per-feature trend test.
    """
    check_is_fitted(model, "coef_")
    X, event, time = _unpack(data)
    if feature_names is None:
        feature_names = (data.feature_names if isinstance(data, SurvivalDataset)
                         else tuple(f"x{j}" for j in range(X.shape[1])))
    lik = CoxPartialLikelihood(X, event, time)
    rs = lik.risk
    means = lik.risk_set_means(np.asarray(model.coef_, dtype=np.float64))
    ev = rs.event_rows
    residuals = lik.X[ev] - means[rs.event_group]
    times = rs.time[ev]
    k = X.shape[1]
    if ev.size < 3:
        warnings.warn("fewer than 3 events; proportionality test not performed",
                      RuntimeWarning, stacklevel=2)
        return ProportionalityReport(tuple(feature_names), times, residuals,
                                     np.full(k, np.nan), alpha, insufficient=True)
    km = kaplan_meier(make_survival_array(event, time))
    transformed = 1.0 - km(times)
    p_values = np.array([_trend_p_value(residuals[:, j], transformed) for j in range(k)])
    return ProportionalityReport(tuple(feature_names), times, residuals, p_values, alpha)

