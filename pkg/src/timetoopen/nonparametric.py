"""Kaplan-Meier, Breslow baseline hazard and the two-sample log-rank test."""
from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._risk import RiskSets
from .data import SurvivalDataset, check_survival_y


@dataclass(frozen=True)
class StepSurvivalCurve:
    """Right-continuous step function S(t) with its cumulative hazard H(t).

    Before ``times[0]`` the curve is S = 1, H = 0. Between steps the value
    after the last step at or before ``t`` applies.
    """

    times: np.ndarray
    survival: np.ndarray
    cum_hazard: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        s = np.asarray(self.survival, dtype=np.float64)
        h = np.asarray(self.cum_hazard, dtype=np.float64)
        if not (t.shape == s.shape == h.shape) or t.ndim != 1:
            raise ValueError("times, survival and cum_hazard must be 1-d and equally long")
        if t.size:
            if np.any(np.diff(t) <= 0):
                raise ValueError("times must be strictly increasing")
            if np.any((s < 0) | (s > 1)) or np.any(np.diff(s) > 0):
                raise ValueError("survival must lie in [0, 1] and be non-increasing")
            if h[0] < 0 or np.any(np.diff(h) < 0):
                raise ValueError("cum_hazard must be non-negative and non-decreasing")
        for name, value in (("times", t), ("survival", s), ("cum_hazard", h)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)

    @classmethod
    def from_cum_hazard(cls, times, cum_hazard) -> "StepSurvivalCurve":
        cum_hazard = np.asarray(cum_hazard, dtype=np.float64)
        return cls(times, np.exp(-cum_hazard), cum_hazard)

    def _index(self, t):
        return np.searchsorted(self.times, t, side="right") - 1

    def __call__(self, t):
        """Evaluate S(t); scalar in, scalar out."""
        idx = self._index(t)
        out = np.where(idx < 0, 1.0, self.survival[np.maximum(idx, 0)] if self.times.size else 1.0)
        return float(out) if np.ndim(out) == 0 else out

    def cumulative_hazard(self, t):
        idx = self._index(t)
        out = np.where(idx < 0, 0.0, self.cum_hazard[np.maximum(idx, 0)] if self.times.size else 0.0)
        return float(out) if np.ndim(out) == 0 else out

    def power(self, exponent: float) -> "StepSurvivalCurve":
        """Curve with cumulative hazard scaled by ``exponent`` (S ** exponent)."""
        if not exponent > 0:
            raise ValueError("exponent must be positive")
        return StepSurvivalCurve(self.times, self.survival ** exponent,
                                 self.cum_hazard * exponent)

    def to_csv(self, path) -> None:
        """Two-column ``time,survival`` export for plotting."""
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["time", "survival"])
            writer.writerow(["0.0", "1.0"])
            for t, s in zip(self.times, self.survival):
                writer.writerow([repr(float(t)), repr(float(s))])


def _time_event(data):
    if isinstance(data, SurvivalDataset):
        return data.duration, data.event
    event, time = check_survival_y(data)
    return time, event


def kaplan_meier(data) -> StepSurvivalCurve:
    """Product-limit estimate of the survivor function.

    Parameters
    ----------
    data : SurvivalDataset or structured survival array

    Returns
    -------
    StepSurvivalCurve
        Steps at the distinct event times. ``cum_hazard`` is ``-log S``.
    """
    time, event = _time_event(data)
    if time.size == 0:
        raise ValueError("empty data")
    rs = RiskSets(time, event)
    if rs.event_times.size == 0:
        warnings.warn("no events observed; Kaplan-Meier curve is flat at 1", RuntimeWarning,
                      stacklevel=2)
        return StepSurvivalCurve(np.empty(0), np.empty(0), np.empty(0))
    n_at_risk = rs.n - rs.start
    survival = np.cumprod(1.0 - rs.n_events / n_at_risk)
    with np.errstate(divide="ignore"):
        cum_hazard = -np.log(survival)
    cum_hazard = np.maximum.accumulate(np.maximum(cum_hazard, 0.0))
    return StepSurvivalCurve(rs.event_times, survival, cum_hazard)


def breslow_increments(rs: RiskSets, log_hazard_sorted):
    """Baseline hazard jumps ``d_j / sum_{R(t_j)} w_l exp(eta_l)``."""
    shift = float(np.max(log_hazard_sorted)) if log_hazard_sorted.size else 0.0
    denom = rs.at_risk(rs.weight * np.exp(log_hazard_sorted - shift))
    return rs.n_events / denom * math.exp(-shift)


def breslow_baseline(data, relative_hazards, sample_weight=None) -> StepSurvivalCurve:
    """Breslow estimate of the cumulative baseline hazard.

    Parameters
    ----------
    data : SurvivalDataset or structured survival array
    relative_hazards : array-like, shape (n_samples,)
        Positive relative hazards aligned with the rows of ``data``.
    sample_weight : array-like, optional
        Row weights entering both the event counts and the risk-set sums.

    Returns
    -------
    StepSurvivalCurve
        Baseline curve with ``S_0 = exp(-H_0)``.
    """
    time, event = _time_event(data)
    psi = np.asarray(relative_hazards, dtype=np.float64)
    if psi.shape != time.shape:
        raise ValueError("relative_hazards must align with the data rows")
    if not np.all(np.isfinite(psi)) or np.any(psi <= 0):
        raise ValueError("relative hazards must be positive and finite")
    rs = RiskSets(time, event, sample_weight)
    increments = breslow_increments(rs, np.log(psi[rs.order]))
    return StepSurvivalCurve.from_cum_hazard(rs.event_times, np.cumsum(increments))


def _logrank_parts(time_a, event_a, time_b, event_b):
    time = np.concatenate([time_a, time_b])
    event = np.concatenate([event_a, event_b])
    in_a = np.concatenate([np.ones(time_a.size, bool), np.zeros(time_b.size, bool)])
    rs = RiskSets(time, event)
    n = (rs.n - rs.start).astype(np.float64)
    n_a = rs.at_risk(in_a[rs.order].astype(np.float64))
    d = rs.n_events
    d_a = np.bincount(rs.event_group, weights=in_a[rs.order][rs.event_rows].astype(np.float64),
                      minlength=d.size)
    expected = d * n_a / n
    with np.errstate(invalid="ignore", divide="ignore"):
        var = np.where(n > 1, d * (n_a / n) * (1 - n_a / n) * (n - d) / (n - 1), 0.0)
    return float(np.sum(d_a - expected)), float(np.sum(var))


def log_rank_test(group_a, group_b) -> tuple[float, float]:
    """Two-sample log-rank test.

    Returns
    -------
    statistic : float
        Chi-square statistic with one degree of freedom.
    p_value : float
    """
    if isinstance(group_a, SurvivalDataset) and isinstance(group_b, SurvivalDataset):
        if group_a.censoring_window != group_b.censoring_window:
            raise ValueError("groups must share the censoring window")
    time_a, event_a = _time_event(group_a)
    time_b, event_b = _time_event(group_b)
    if time_a.size == 0 or time_b.size == 0:
        raise ValueError("both groups must be non-empty")
    if not event_a.any() and not event_b.any():
        raise ValueError("both groups are free of events")
    diff, var = _logrank_parts(time_a, event_a, time_b, event_b)
    if var <= 0:
        statistic = 0.0 if diff == 0 else math.inf
    else:
        statistic = diff * diff / var
    # chi-square(1) survival function
    p_value = math.erfc(math.sqrt(statistic / 2.0)) if math.isfinite(statistic) else 0.0
    return statistic, min(max(p_value, 0.0), 1.0)
