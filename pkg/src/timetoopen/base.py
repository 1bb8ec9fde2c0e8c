"""Shared plumbing for the survival estimators."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, check_is_fitted

from .data import SurvivalDataset, check_survival_y
from .nonparametric import StepSurvivalCurve


def check_X_y_survival(X, y):
    """Validate features and survival target; returns ``X, event, time``."""
    if isinstance(X, SurvivalDataset):
        if y is not None:
            raise ValueError("pass either a SurvivalDataset or X and y, not both")
        X, y = X.X, X.y
    X = check_array(X, dtype=np.float64, ensure_all_finite=True)
    event, time = check_survival_y(y)
    if X.shape[0] != time.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {time.shape[0]}")
    return X, event, time


def infer_censoring_window(event, time, censoring_window=None):
    """Censored rows sit exactly at the window; fall back to the largest time."""
    if censoring_window is not None:
        return float(censoring_window)
    if (~event).any():
        return float(np.max(time[~event]))
    return float(np.max(time))


def fit_standardizer(X):
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    return mean, scale


def percentile_times(cum_baseline, times, scaled_threshold, window):
    """First baseline step where ``H_0(t) >= scaled_threshold``, else ``window``.

    ``scaled_threshold`` is per row; ``inf`` means the curve never crosses.
    Only steps at or before ``window`` count.
    """
    usable = times <= window
    cum = cum_baseline[usable]
    t = times[usable]
    idx = np.searchsorted(cum, scaled_threshold, side="left")
    out = np.full(scaled_threshold.shape, float(window))
    hit = idx < cum.size
    out[hit] = t[idx[hit]]
    return out


class SurvivalPredictionMixin:
    """Prediction helpers for models with ``S_i(t) = S_0(t) ** psi_i``.

    Subclasses define ``predict`` (log relative hazard), ``baseline_`` and
    ``censoring_window_``.
    """

    def predict_relative_hazard(self, X):
        return np.exp(self.predict(X))

    def predict_survival_function(self, X):
        """Individual survivor curves, one :class:`StepSurvivalCurve` per row."""
        check_is_fitted(self, "baseline_")
        base = self.baseline_
        return [StepSurvivalCurve.from_cum_hazard(base.times, base.cum_hazard * psi)
                for psi in self.predict_relative_hazard(X)]

    def predict_survival(self, X, t):
        """Survival probability of every row at time ``t``."""
        check_is_fitted(self, "baseline_")
        return np.exp(-self.baseline_.cumulative_hazard(t) * self.predict_relative_hazard(X))

    def predict_open_probability(self, X):
        """Probability of an event inside the censoring window, ``1 - S_i(C)``."""
        return 1.0 - self.predict_survival(X, self.censoring_window_)

    def predict_time(self, X, percentile=5):
        """Percentile time-to-event ``t(p)``, saturating at the censoring window."""
        return self.predict_times(X, (percentile,))[percentile]

    def predict_times(self, X, percentiles):
        """``{p: t(p)}`` for several percentiles from one pass over ``X``."""
        check_is_fitted(self, "baseline_")
        psi = self.predict_relative_hazard(X)
        return {p: percentile_times(self.baseline_.cum_hazard, self.baseline_.times,
                                    -np.log1p(-p / 100.0) / psi, self.censoring_window_)
                for p in percentiles}

    def score(self, X, y):
        """AUC of the open probability against the event indicator."""
        from .metrics import auc

        _, event, _ = check_X_y_survival(X, y)
        return auc(self.predict_open_probability(X), event)
