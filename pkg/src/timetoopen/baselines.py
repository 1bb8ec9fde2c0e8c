"""Comparison baselines: open-rate and constant-time predictors, logistic
regression for open / not-open and linear regression for time-to-open."""
from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, clone
from sklearn.utils.validation import check_array, check_is_fitted

from ._glm import GaussianLikelihood, fit_logistic
from ._solver import penalized_newton
from .base import check_X_y_survival, fit_standardizer, infer_censoring_window
from .data import DEFAULT_EPSILON

__all__ = [
    "ConstantTimeBaseline",
    "LinearTimeBaseline",
    "LogisticBaseline",
    "OpenRateBaseline",
    "SplitTaskModel",
    "predict_baseline",
]


class _WindowMixin:
    def _remember_window(self, event, time):
        self.censoring_window_ = infer_censoring_window(event, time, self.censoring_window)


class OpenRateBaseline(_WindowMixin, BaseEstimator):
    """Scores each row by its historical open rate and predicts the window as time.

    Parameters
    ----------
    column : int
        Index of the historical open-rate feature.
    """

    def __init__(self, column=None, censoring_window=None):
        self.column = column
        self.censoring_window = censoring_window

    def fit(self, X, y=None):
        X, event, time = check_X_y_survival(X, y)
        if self.column is None or not 0 <= self.column < X.shape[1]:
            raise ValueError("OpenRateBaseline needs the column index of the open-rate feature")
        self.n_features_in_ = X.shape[1]
        self._remember_window(event, time)
        return self

    def predict_open_probability(self, X):
        check_is_fitted(self, "censoring_window_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("open-rate feature missing from X")
        return X[:, self.column].copy()

    def predict_time(self, X, percentile=None):
        check_is_fitted(self, "censoring_window_")
        return np.full(check_array(X).shape[0], self.censoring_window_)


class ConstantTimeBaseline(_WindowMixin, BaseEstimator):
    """Predicts the censoring window as time-to-open for every row."""

    def __init__(self, censoring_window=None):
        self.censoring_window = censoring_window

    def fit(self, X, y=None):
        X, event, time = check_X_y_survival(X, y)
        self.n_features_in_ = X.shape[1]
        self._remember_window(event, time)
        self.open_rate_ = float(event.mean())
        return self

    def predict_open_probability(self, X):
        check_is_fitted(self, "open_rate_")
        return np.full(check_array(X).shape[0], self.open_rate_)

    def predict_time(self, X, percentile=None):
        check_is_fitted(self, "censoring_window_")
        return np.full(check_array(X).shape[0], self.censoring_window_)


class LogisticBaseline(_WindowMixin, BaseEstimator):
    """Elastic-net logistic regression of the event indicator on standardised features."""

    def __init__(self, penalty=0.0, l1_ratio=0.0, censoring_window=None):
        self.penalty = penalty
        self.l1_ratio = l1_ratio
        self.censoring_window = censoring_window

    def fit(self, X, y=None):
        X, event, time = check_X_y_survival(X, y)
        if event.all() or not event.any():
            raise ValueError("logistic regression needs both opened and unopened rows")
        self.n_features_in_ = X.shape[1]
        self._remember_window(event, time)
        self.mean_, self.scale_ = fit_standardizer(X)
        Z = self._design(X)
        self.coef_std_, self.loglik_ = fit_logistic(Z, event.astype(np.float64),
                                                    penalty=self.penalty,
                                                    l1_ratio=self.l1_ratio)
        slopes = self.coef_std_[1:] / self.scale_
        self.intercept_ = float(self.coef_std_[0] - slopes @ self.mean_)
        self.coef_ = slopes
        return self

    def _design(self, X):
        return np.column_stack([np.ones(X.shape[0]), (X - self.mean_) / self.scale_])

    def decision_function(self, X):
        check_is_fitted(self, "coef_std_")
        return self._design(check_array(X, dtype=np.float64)) @ self.coef_std_

    def predict_open_probability(self, X):
        return expit(self.decision_function(X))


class LinearTimeBaseline(_WindowMixin, BaseEstimator):
    """Least squares on the rows with an observed event only.

    Parameters
    ----------
    penalty, l1_ratio : float
        Optional elastic-net penalty (intercept excluded).
    log_time : bool, default True
        Regress log-duration and exponentiate predictions; ``False`` uses raw
        minutes.
    epsilon : float
        Lower clamp for predictions; the upper clamp is the window.
    """

    def __init__(self, penalty=0.0, l1_ratio=0.0, log_time=True, epsilon=DEFAULT_EPSILON,
                 censoring_window=None):
        self.penalty = penalty
        self.l1_ratio = l1_ratio
        self.log_time = log_time
        self.epsilon = epsilon
        self.censoring_window = censoring_window

    def fit(self, X, y=None):
        X, event, time = check_X_y_survival(X, y)
        if event.sum() < 2:
            raise ValueError("linear time regression needs at least two event rows")
        self.n_features_in_ = X.shape[1]
        self._remember_window(event, time)
        Xe, te = X[event], time[event]
        self.mean_, self.scale_ = fit_standardizer(Xe)
        target = np.log(np.maximum(te, self.epsilon)) if self.log_time else te
        Z = np.column_stack([np.ones(Xe.shape[0]), (Xe - self.mean_) / self.scale_])
        penalized = np.r_[False, np.ones(X.shape[1], dtype=bool)]
        if self.penalty == 0:
            coef = np.linalg.lstsq(Z, target, rcond=None)[0]
        else:
            coef, _, _, _ = penalized_newton(GaussianLikelihood(Z, target), np.zeros(Z.shape[1]),
                                             self.penalty, self.l1_ratio, penalized)
        self.coef_std_ = coef
        return self

    def predict_time(self, X, percentile=None):
        check_is_fitted(self, "coef_std_")
        X = check_array(X, dtype=np.float64)
        raw = self.coef_std_[0] + ((X - self.mean_) / self.scale_) @ self.coef_std_[1:]
        pred = np.exp(np.minimum(raw, 700.0)) if self.log_time else raw
        return np.clip(pred, self.epsilon, self.censoring_window_)


class SplitTaskModel(BaseEstimator):
    """Pairs a classifier for the open probability with a separate time model."""

    def __init__(self, classifier=None, regressor=None):
        self.classifier = classifier
        self.regressor = regressor

    def fit(self, X, y=None):
        self.classifier_ = clone(self.classifier).fit(X, y)
        self.regressor_ = clone(self.regressor).fit(X, y)
        self.censoring_window_ = self.regressor_.censoring_window_
        return self

    def predict_open_probability(self, X):
        return self.classifier_.predict_open_probability(X)

    def predict_time(self, X, percentile=None):
        return self.regressor_.predict_time(X, percentile)


def predict_baseline(model, X):
    """``(open_probability, predicted_time)``; ``None`` where a variant has no output."""
    prob = model.predict_open_probability(X) if hasattr(model, "predict_open_probability") else None
    time = model.predict_time(X) if hasattr(model, "predict_time") else None
    return prob, time
