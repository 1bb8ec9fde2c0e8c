"""Mixture cure model: logistic incidence plus a proportional-hazards latency.

A row belongs to the latent "prone" class with probability
``pi(Z) = expit(b @ Z)``; prone rows follow ``S(t | prone) = S_0(t) ** exp(X @ beta)``
and the rest never experience the event, so

    S(t) = pi(Z) * S(t | prone) + 1 - pi(Z).

The model is fitted by EM over the latent class.
"""
from __future__ import annotations

import warnings

import numpy as np
from scipy.special import expit, log_expit
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._glm import SEPARATION_BOUND, LogisticLikelihood
from ._solver import penalized_newton
from .base import check_X_y_survival, fit_standardizer, infer_censoring_window, percentile_times
from .cox import CoxPartialLikelihood
from .nonparametric import StepSurvivalCurve

__all__ = ["MixtureCureCox", "mixture_survivor"]


def mixture_survivor(pi, latency_surv):
    """Population survival ``pi * S(t | prone) + (1 - pi)``."""
    pi = np.asarray(pi, dtype=np.float64)
    latency_surv = np.asarray(latency_surv, dtype=np.float64)
    if np.any((pi < 0) | (pi > 1)) or np.any((latency_surv < 0) | (latency_surv > 1)):
        raise ValueError("pi and latency survival must lie in [0, 1]")
    out = pi * latency_surv + (1.0 - pi)
    return float(out) if out.ndim == 0 else out


class MixtureCureCox(BaseEstimator):
    """Mixture cure model with Cox latency, fitted by expectation-maximisation.

    E-step: event rows are prone with certainty; a censored row is prone with
    posterior ``pi S(C|prone) / (pi S(C|prone) + 1 - pi)``.
    M-step: weighted logistic regression of those weights on ``Z``, a Cox
    partial likelihood whose risk sets carry the same weights, and a weighted
    Breslow baseline. The latency survivor is held at its last value beyond
    the last event time.

    Parameters
    ----------
    penalty, l1_ratio : float, default 0.0
        Elastic-net penalty on the latency coefficients.
    incidence_penalty, incidence_l1_ratio : float, default 0.0
        Elastic-net penalty on the incidence coefficients (intercept excluded).
    incidence_features : list of int, optional
        Columns of ``X`` forming ``Z``; all columns by default. An intercept
        is always added.
    max_iter : int, default 500
        Maximum number of EM iterations.
    tol : float, default 1e-7
        EM stops once the observed-data log-likelihood changes by less than
        ``tol * max(1, |loglik|)``.
    threshold : float, default 0.5
        Incidence probability at or above which a row counts as engaged.
    censoring_window : float, optional

    Attributes
    ----------
    coef_ : ndarray
        Latency coefficients on the original feature scale.
    incidence_coef_ : ndarray
        ``[intercept, coefficients...]`` on the original feature scale.
    baseline_ : StepSurvivalCurve
        Latency baseline for centred features.
    em_trace_ : ndarray
        Observed-data log-likelihood (minus any penalties) after
        initialisation and after every EM iteration.
    """

    def __init__(self, penalty=0.0, l1_ratio=0.0, incidence_penalty=0.0,
                 incidence_l1_ratio=0.0, incidence_features=None, max_iter=500, tol=1e-7,
                 threshold=0.5, censoring_window=None):
        self.penalty = penalty
        self.l1_ratio = l1_ratio
        self.incidence_penalty = incidence_penalty
        self.incidence_l1_ratio = incidence_l1_ratio
        self.incidence_features = incidence_features
        self.max_iter = max_iter
        self.tol = tol
        self.threshold = threshold
        self.censoring_window = censoring_window

    # design matrices -------------------------------------------------
    def _incidence_columns(self, n_features):
        if self.incidence_features is None:
            return np.arange(n_features)
        cols = np.asarray(self.incidence_features, dtype=np.intp)
        if cols.size and (cols.min() < 0 or cols.max() >= n_features):
            raise ValueError("incidence_features out of range")
        return cols

    def _latency_design(self, X):
        return (X - self.mean_) / self.scale_

    def _incidence_design(self, X):
        Zs = (X[:, self.incidence_columns_] - self.mean_[self.incidence_columns_]) \
            / self.scale_[self.incidence_columns_]
        return np.column_stack([np.ones(X.shape[0]), Zs])

    # likelihood pieces -----------------------------------------------
    def _penalty(self, b, beta, ridge):
        pen = 0.0
        if self.penalty > 0:
            pen += self.penalty * (self.l1_ratio * np.abs(beta).sum()
                                   + 0.5 * (1 - self.l1_ratio) * beta @ beta)
        lam, l1r = self._incidence_penalty_terms(ridge)
        if lam > 0:
            pb = b if ridge else b[1:]
            pen += lam * (l1r * np.abs(pb).sum() + 0.5 * (1 - l1r) * pb @ pb)
        return pen

    def _incidence_penalty_terms(self, ridge):
        lam = self.incidence_penalty + ridge
        if lam == 0:
            return 0.0, 0.0
        return lam, self.incidence_penalty * self.incidence_l1_ratio / lam

    @staticmethod
    def _observed_loglik(eta_inc, eta_lat, event, cum_at_row, jump_at_row, cum_end):
        log_pi = log_expit(eta_inc)
        log_1mpi = log_expit(-eta_inc)
        psi = np.exp(eta_lat)
        ev = event
        events = log_pi[ev] + np.log(jump_at_row[ev]) + eta_lat[ev] - cum_at_row[ev] * psi[ev]
        cens = np.logaddexp(log_pi[~ev] - cum_end * psi[~ev], log_1mpi[~ev])
        return float(events.sum() + cens.sum())

    def _posterior(self, eta_inc, eta_lat, event, cum_end):
        log_num = log_expit(eta_inc) - cum_end * np.exp(eta_lat)
        log_den = np.logaddexp(log_num, log_expit(-eta_inc))
        return np.where(event, 1.0, np.exp(log_num - log_den))

    # fitting ---------------------------------------------------------
    def fit(self, X, y=None):
        X, event, time = check_X_y_survival(X, y)
        if not event.any():
            raise ValueError("mixture cure model needs at least one event")
        if event.all():
            warnings.warn("no censored rows; the incidence part is not identified",
                          RuntimeWarning, stacklevel=2)
        self.n_features_in_ = X.shape[1]
        self.censoring_window_ = infer_censoring_window(event, time, self.censoring_window)
        self.incidence_columns_ = self._incidence_columns(X.shape[1])
        self.mean_, self.scale_ = fit_standardizer(X)
        Xs = self._latency_design(X)
        Z = self._incidence_design(X)
        n_inc = Z.shape[1]
        inc_penalized = np.r_[False, np.ones(n_inc - 1, dtype=bool)]

        # incidence start: logistic regression of the event indicator
        ridge = 0.0
        b = self._logistic_step(Z, event.astype(np.float64), np.zeros(n_inc), ridge,
                                inc_penalized)
        if np.max(np.abs(b)) > SEPARATION_BOUND:
            warnings.warn("incidence logistic fit is separated; using a ridge penalty",
                          RuntimeWarning, stacklevel=2)
            ridge = 1e-3 * X.shape[0]
            b = self._logistic_step(Z, event.astype(np.float64), np.zeros(n_inc), ridge,
                                    inc_penalized)
        beta = np.zeros(X.shape[1])

        lik = CoxPartialLikelihood(Xs, event, time)
        rs = lik.risk
        inv = np.empty_like(rs.order)
        inv[rs.order] = np.arange(rs.order.size)
        group = rs.group_of(time)

        def baseline_pieces(weights, beta):
            lik.set_weights(weights)
            curve = lik.baseline(beta)
            cum = curve.cum_hazard
            jumps = np.diff(np.r_[0.0, cum])
            cum_at_row = np.where(group >= 0, cum[np.maximum(group, 0)], 0.0)
            jump_at_row = np.where(group >= 0, jumps[np.maximum(group, 0)], 1.0)
            return curve, cum_at_row, jump_at_row, cum[-1]

        eta_inc = Z @ b
        weights = np.where(event, 1.0, expit(eta_inc))
        curve, cum_at_row, jump_at_row, cum_end = baseline_pieces(weights, beta)
        eta_lat = Xs @ beta
        trace = [self._observed_loglik(eta_inc, eta_lat, event, cum_at_row, jump_at_row,
                                       cum_end) - self._penalty(b, beta, ridge)]
        converged = False
        for it in range(1, self.max_iter + 1):
            weights = self._posterior(eta_inc, eta_lat, event, cum_end)
            b_new = self._logistic_step(Z, weights, b, ridge, inc_penalized)
            if ridge == 0.0 and np.max(np.abs(b_new)) > SEPARATION_BOUND:
                warnings.warn("incidence logistic fit is separated; using a ridge penalty",
                              RuntimeWarning, stacklevel=2)
                ridge = 1e-3 * X.shape[0]
                b_new = self._logistic_step(Z, weights, b, ridge, inc_penalized)
            b = b_new
            lik.set_weights(weights)
            beta, _, _, _ = penalized_newton(
                lik, beta, self.penalty, self.l1_ratio, max_iter=100, tol=1e-12,
                gtol=1e-9, raise_on_failure=False,
            )
            curve, cum_at_row, jump_at_row, cum_end = baseline_pieces(weights, beta)
            eta_inc = Z @ b
            eta_lat = Xs @ beta
            value = self._observed_loglik(eta_inc, eta_lat, event, cum_at_row, jump_at_row,
                                          cum_end) - self._penalty(b, beta, ridge)
            change = value - trace[-1]
            trace.append(value)
            if abs(change) < self.tol * max(1.0, abs(value)):
                converged = True
                break
        if not converged:
            warnings.warn(f"EM did not converge in {self.max_iter} iterations",
                          RuntimeWarning, stacklevel=2)
        self.n_iter_ = it
        self.em_trace_ = np.asarray(trace)
        self.weights_ = weights
        self.coef_std_ = beta
        self.coef_ = beta / self.scale_
        self.incidence_coef_std_ = b
        cols = self.incidence_columns_
        slopes = b[1:] / self.scale_[cols]
        self.incidence_coef_ = np.r_[b[0] - slopes @ self.mean_[cols], slopes]
        self.incidence_ridge_ = ridge
        self.baseline_ = curve
        return self

    def _logistic_step(self, Z, target, b0, ridge, penalized):
        lam, l1r = self._incidence_penalty_terms(ridge)
        pen_mask = penalized.copy()
        if ridge:
            pen_mask[0] = True
        lik = LogisticLikelihood(Z, target)
        b, _, _, _ = penalized_newton(lik, b0, lam, l1r, pen_mask, max_iter=100,
                                      tol=1e-12, gtol=1e-9, raise_on_failure=False)
        return b

    # prediction ------------------------------------------------------
    def predict(self, X):
        """Latency log relative hazard (centred at the training mean)."""
        check_is_fitted(self, "coef_std_")
        X = check_array(X, dtype=np.float64)
        return self._latency_design(X) @ self.coef_std_

    def predict_incidence(self, X):
        """Probability ``pi(Z)`` of belonging to the prone class."""
        check_is_fitted(self, "incidence_coef_std_")
        X = check_array(X, dtype=np.float64)
        return expit(self._incidence_design(X) @ self.incidence_coef_std_)

    def classify_engagement(self, X):
        """``(pi, engaged)`` with ties at the threshold counted as engaged."""
        pi = self.predict_incidence(X)
        return pi, pi >= self.threshold

    def e_step(self, X, y=None):
        """Posterior probability that each row is prone, under the fitted model."""
        X, event, _ = check_X_y_survival(X, y)
        eta_inc = self._incidence_design(X) @ self.incidence_coef_std_
        return self._posterior(eta_inc, self.predict(X), event,
                               float(self.baseline_.cum_hazard[-1]))

    def predict_latency_survival(self, X, t):
        check_is_fitted(self, "baseline_")
        return np.exp(-self.baseline_.cumulative_hazard(t) * np.exp(self.predict(X)))

    def predict_survival(self, X, t):
        return mixture_survivor(self.predict_incidence(X), self.predict_latency_survival(X, t))

    def predict_survival_function(self, X):
        """Population survivor curve of every row as :class:`StepSurvivalCurve`."""
        check_is_fitted(self, "baseline_")
        base = self.baseline_
        curves = []
        for pi, psi in zip(self.predict_incidence(X), np.exp(self.predict(X))):
            surv = pi * np.exp(-base.cum_hazard * psi) + (1.0 - pi)
            with np.errstate(divide="ignore"):
                cum = -np.log(surv)
            curves.append(StepSurvivalCurve(base.times, surv, cum))
        return curves

    def predict_open_probability(self, X):
        return 1.0 - self.predict_survival(X, self.censoring_window_)

    def predict_time(self, X, percentile=5):
        """Percentile time ``t(p)``; rows whose curve stays above ``1 - p/100`` get the window."""
        return self.predict_times(X, (percentile,))[percentile]

    def predict_times(self, X, percentiles):
        """``{p: t(p)}`` for several percentiles from one pass over ``X``."""
        check_is_fitted(self, "baseline_")
        pi = self.predict_incidence(X)
        psi = np.exp(self.predict(X))
        out = {}
        for p in percentiles:
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = (p / 100.0) / pi
                target = np.where(ratio < 1.0, -np.log1p(-np.minimum(ratio, 1.0)) / psi, np.inf)
            out[p] = percentile_times(self.baseline_.cum_hazard, self.baseline_.times, target,
                                      self.censoring_window_)
        return out

    def score(self, X, y):
        from .metrics import auc

        _, event, _ = check_X_y_survival(X, y)
        return auc(self.predict_open_probability(X), event)
