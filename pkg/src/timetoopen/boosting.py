"""Gradient-boosted Cox model: the log relative hazard is a sum of small trees.

Each stage fits a regression tree to the gradient of the Breslow partial
log-likelihood with respect to the per-row scores and adds it with
shrinkage.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from ._risk import RiskSets
from .base import SurvivalPredictionMixin, check_X_y_survival, infer_censoring_window
from .nonparametric import StepSurvivalCurve, breslow_increments

__all__ = ["CoxBoost", "RegressionTree", "relative_hazard"]


@dataclass
class RegressionTree:
    """Binary tree with axis-aligned ``x <= threshold`` splits.

    Node arrays are indexed by node id; leaves have ``feature == -1``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def apply(self, X) -> np.ndarray:
        """Leaf id reached by every row."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            inner = feat >= 0
            if not inner.any():
                return node
            r, n, f = rows[inner], node[inner], feat[inner]
            goes_left = X[r, f] <= self.threshold[n]
            node[r] = np.where(goes_left, self.left[n], self.right[n])

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(v) for v in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": [float(v) for v in self.value],
        }

    @classmethod
    def from_dict(cls, d) -> "RegressionTree":
        return cls(
            np.asarray(d["feature"], dtype=np.intp),
            np.asarray(d["threshold"], dtype=np.float64),
            np.asarray(d["left"], dtype=np.intp),
            np.asarray(d["right"], dtype=np.intp),
            np.asarray(d["value"], dtype=np.float64),
        )


def _candidate_thresholds(X, n_bins):
    """Per-feature split candidates taken from the data's own quantiles."""
    levels = np.arange(1, n_bins + 1) / (n_bins + 1)
    out = []
    for j in range(X.shape[1]):
        q = np.unique(np.quantile(X[:, j], levels, method="inverted_cdf"))
        # a threshold at the maximum sends every row left
        out.append(q[q < X[:, j].max()])
    return out


def _grow_tree(binned, thresholds, residual, max_depth, min_samples_leaf):
    """Least-squares tree on pre-binned features; returns the tree and row leaves."""
    n_rows, n_features = binned.shape
    feature, threshold, left, right, value = [], [], [], [], []
    leaf_of_row = np.zeros(n_rows, dtype=np.intp)

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    stack = [(new_node(), np.arange(n_rows), 0)]
    while stack:
        node, rows, depth = stack.pop()
        g = residual[rows]
        n = rows.size
        value[node] = float(g.mean())
        leaf_of_row[rows] = node
        if depth >= max_depth or n < 2 * min_samples_leaf:
            continue
        total = g.sum()
        best_gain, best = 0.0, None
        for j in range(n_features):
            n_thr = thresholds[j].size
            if n_thr == 0:
                continue
            b = binned[rows, j]
            cnt = np.cumsum(np.bincount(b, minlength=n_thr + 1)[:n_thr])
            sm = np.cumsum(np.bincount(b, weights=g, minlength=n_thr + 1)[:n_thr])
            ok = (cnt >= min_samples_leaf) & (n - cnt >= min_samples_leaf)
            if not ok.any():
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                gain = sm ** 2 / cnt + (total - sm) ** 2 / (n - cnt) - total ** 2 / n
            gain = np.where(ok, gain, -np.inf)
            s = int(np.argmax(gain))
            if gain[s] > best_gain * (1 + 1e-12) + 1e-300:
                best_gain, best = gain[s], (j, s)
        if best is None:
            continue
        j, s = best
        mask = binned[rows, j] <= s
        feature[node] = j
        threshold[node] = float(thresholds[j][s])
        lnode, rnode = new_node(), new_node()
        left[node], right[node] = lnode, rnode
        # right pushed first so the left subtree gets the lower node ids
        stack.append((rnode, rows[~mask], depth + 1))
        stack.append((lnode, rows[mask], depth + 1))

    tree = RegressionTree(
        np.asarray(feature, dtype=np.intp), np.asarray(threshold),
        np.asarray(left, dtype=np.intp), np.asarray(right, dtype=np.intp),
        np.asarray(value),
    )
    return tree, leaf_of_row


def _loglik_and_gradient(rs: RiskSets, score_sorted):
    """Partial log-likelihood and its gradient w.r.t. the (sorted) row scores."""
    shift = score_sorted.max()
    s0 = rs.at_risk(np.exp(score_sorted - shift))
    ev = rs.event_rows
    loglik = score_sorted[ev].sum() - rs.n_events @ (np.log(s0) + shift)
    cum = np.cumsum(rs.n_events / s0)
    group = rs.group_of(rs.time)
    cum_at_row = np.where(group >= 0, cum[np.maximum(group, 0)], 0.0)
    grad = rs.event.astype(np.float64) - np.exp(score_sorted - shift) * cum_at_row
    return float(loglik), grad


class CoxBoost(SurvivalPredictionMixin, BaseEstimator):
    """Proportional hazards model with a boosted-tree log relative hazard.

    Parameters
    ----------
    n_estimators : int, default 200
        Number of boosting stages (trees).
    learning_rate : float, default 0.05
        Shrinkage applied to every tree, in (0, 1].
    max_depth : int, default 3
    min_samples_leaf : int, default 50
        Minimum number of rows in a leaf.
    n_bins : int, default 32
        Number of per-feature quantiles used as split candidates.
    censoring_window : float, optional

    Attributes
    ----------
    estimators_ : list of RegressionTree
    train_score_ : ndarray
        Training partial log-likelihood before the first and after every
        accepted stage.
    baseline_ : StepSurvivalCurve
    """

    def __init__(self, n_estimators=200, learning_rate=0.05, max_depth=3,
                 min_samples_leaf=50, n_bins=32, censoring_window=None):
        self.n_estimators = n_estimators
        self.learning_rate = learning_rate
        self.max_depth = max_depth
        self.min_samples_leaf = min_samples_leaf
        self.n_bins = n_bins
        self.censoring_window = censoring_window

    def _check_params(self):
        if self.n_estimators < 0:
            raise ValueError(f"n_estimators must be non-negative, got {self.n_estimators}")
        if not 0 < self.learning_rate <= 1:
            raise ValueError(f"learning_rate must be in (0, 1], got {self.learning_rate}")
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be at least 1")
        if not 1 <= self.n_bins <= 255:
            raise ValueError("n_bins must be within [1, 255]")

    def fit(self, X, y=None):
        self._check_params()
        X, event, time = check_X_y_survival(X, y)
        if not event.any():
            raise ValueError("at least one event is required to fit a Cox model")
        self.n_features_in_ = X.shape[1]
        self.censoring_window_ = infer_censoring_window(event, time, self.censoring_window)

        rs = RiskSets(time, event)
        Xs = X[rs.order]
        thresholds = _candidate_thresholds(Xs, self.n_bins)
        binned = np.empty(Xs.shape, dtype=np.uint8)
        for j, thr in enumerate(thresholds):
            binned[:, j] = np.searchsorted(thr, Xs[:, j], side="left")

        score = np.zeros(X.shape[0])
        loglik, grad = _loglik_and_gradient(rs, score)
        history = [loglik]
        self.estimators_ = []
        for stage in range(self.n_estimators):
            tree, leaves = _grow_tree(binned, thresholds, grad, self.max_depth,
                                      self.min_samples_leaf)
            if tree.feature[0] < 0:
                warnings.warn(f"stage {stage}: no admissible split, stage skipped",
                              RuntimeWarning, stacklevel=2)
                continue
            score = score + self.learning_rate * tree.value[leaves]
            self.estimators_.append(tree)
            loglik, grad = _loglik_and_gradient(rs, score)
            if loglik < history[-1] - 1e-9 * abs(history[-1]):
                warnings.warn(f"stage {stage}: training partial likelihood decreased",
                              RuntimeWarning, stacklevel=2)
            history.append(loglik)
        self.train_score_ = np.asarray(history)
        self.baseline_ = StepSurvivalCurve.from_cum_hazard(
            rs.event_times, np.cumsum(breslow_increments(rs, score)))
        return self

    def predict(self, X):
        """Ensemble score F(X), the log relative hazard."""
        check_is_fitted(self, "estimators_")
        X = check_array(X, dtype=np.float64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        out = np.zeros(X.shape[0])
        for tree in self.estimators_:
            out += self.learning_rate * tree.predict(X)
        return out


def relative_hazard(model, X):
    """``exp(F(X))`` for a fitted proportional-hazards estimator."""
    return model.predict_relative_hazard(X)

