"""Classification and time-to-event metrics."""
from __future__ import annotations

import numpy as np
from scipy.stats import rankdata

from .nonparametric import StepSurvivalCurve

DEFAULT_PERCENTILES = (5, 10, 25, 50, 75, 90)


def auc(scores, labels) -> float:
    """Area under the ROC curve via the Mann-Whitney U statistic.

    Tied scores between a positive and a negative count one half.
    """
    scores = np.asarray(scores, dtype=np.float64).ravel()
    labels = np.asarray(labels, dtype=bool).ravel()
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("AUC needs both positive and negative labels")
    ranks = rankdata(scores)
    u = ranks[labels].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def mrad(actual, predicted, events=None, mode="A") -> float:
    """Mean relative absolute deviation ``mean(|t - t_hat| / t)``.

    Parameters
    ----------
    actual : array-like
        Observed durations; censored rows carry the censoring window.
    predicted : array-like
    events : array-like of bool, optional
        Needed for ``mode="O"``.
    mode : {"A", "O"}
        ``"A"`` averages over all rows, ``"O"`` over rows with an event.
    """
    actual = np.asarray(actual, dtype=np.float64).ravel()
    predicted = np.asarray(predicted, dtype=np.float64).ravel()
    if actual.shape != predicted.shape:
        raise ValueError("actual and predicted differ in length")
    if mode == "O":
        if events is None:
            raise ValueError("mode 'O' needs the event indicators")
        events = np.asarray(events, dtype=bool).ravel()
        if events.shape != actual.shape:
            raise ValueError("events and actual differ in length")
        actual, predicted = actual[events], predicted[events]
    elif mode != "A":
        raise ValueError(f"mode must be 'A' or 'O', got {mode!r}")
    if actual.size == 0:
        return float("nan")
    if np.any(actual <= 0):
        raise ValueError("actual durations must be positive")
    return float(np.mean(np.abs(actual - predicted) / actual))


def predict_time_percentile(curve: StepSurvivalCurve, percentile: float, window: float) -> float:
    """Time ``t(p)``: where the curve first drops to ``1 - p/100`` or below.

    The survival probability exceeds ``1 - p/100`` on ``[0, t(p))``. When the
    curve stays above that level up to ``window`` the window is returned.
    """
    if not 0 < percentile < 100:
        raise ValueError("percentile must lie in (0, 100)")
    if not window > 0:
        raise ValueError("window must be positive")
    level = 1.0 - percentile / 100.0
    usable = curve.times <= window
    below = np.flatnonzero(curve.survival[usable] <= level)
    if below.size == 0:
        return float(window)
    return float(curve.times[usable][below[0]])
