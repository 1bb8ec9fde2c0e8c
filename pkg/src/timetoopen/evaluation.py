"""Model comparison across censoring windows and survival percentiles."""
from __future__ import annotations

import csv
import io
import itertools
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator, clone

from .baselines import (LinearTimeBaseline, LogisticBaseline, OpenRateBaseline,
                        SplitTaskModel)
from .base import fit_standardizer
from .boosting import CoxBoost
from .cox import CoxPartialLikelihood, CoxPHElasticNet
from .cure import MixtureCureCox
from .data import RawEventLog, SurvivalDataset, apply_censoring
from .metrics import DEFAULT_PERCENTILES, auc, mrad

logger = logging.getLogger(__name__)

DEFAULT_WINDOWS = (180.0, 360.0, 720.0)
MODEL_NAMES = ("B", "LR", "CPH-L", "CPH-G", "MM")
OPEN_RATE_FEATURE = "hist_open_rate"
N_JOBS_ENV = "TIMETOOPEN_N_JOBS"

ASSUMPTIONS = {
    "mrad_a_censored_actual": "censored rows use the censoring window as actual time",
    "t_hat_saturation": "t(p) equals the censoring window when the curve never drops to 1 - p/100",
    "open_probability": "1 - S_i(C)",
}


def n_jobs_from_env(default=1) -> int:
    value = os.environ.get(N_JOBS_ENV)
    return int(value) if value else default


def make_model(name: str, params: Mapping | None = None,
               feature_names: Sequence[str] = ()):
    """Estimator for one of the compared model families.

    ``params`` are passed to the estimator; for ``"LR"`` they go to both the
    logistic and the linear model.
    """
    params = dict(params or {})
    if name == "B":
        if OPEN_RATE_FEATURE not in feature_names:
            raise ValueError(f"baseline B needs a {OPEN_RATE_FEATURE!r} feature")
        return OpenRateBaseline(column=list(feature_names).index(OPEN_RATE_FEATURE))
    if name == "LR":
        return SplitTaskModel(LogisticBaseline(**params), LinearTimeBaseline(**params))
    if name == "CPH-L":
        return CoxPHElasticNet(**params)
    if name == "CPH-G":
        return CoxBoost(**params)
    if name == "MM":
        return MixtureCureCox(**params)
    raise ValueError(f"unknown model {name!r}; choose from {MODEL_NAMES}")


def individual_survivor(model, X):
    """Survivor curve of every row of ``X`` under a fitted survival model."""
    return model.predict_survival_function(X)


def predict_times(model, X, percentiles) -> dict:
    """``{p: t(p)}``, batched when the model supports it."""
    if hasattr(model, "predict_times"):
        return model.predict_times(X, percentiles)
    return {p: model.predict_time(X, p) for p in percentiles}


def score_model(model, ds: SurvivalDataset, percentiles=DEFAULT_PERCENTILES) -> list[dict]:
    """AUC and MRAD of a fitted model on one dataset, one row per percentile."""
    prob = model.predict_open_probability(ds.X)
    try:
        area = auc(prob, ds.event)
    except ValueError:
        area = float("nan")
    times = predict_times(model, ds.X, percentiles)
    rows = []
    for p in percentiles:
        t_hat = times[p]
        rows.append({
            "percentile": p,
            "auc": area,
            "mrad_a": mrad(ds.duration, t_hat, ds.event, "A"),
            "mrad_o": mrad(ds.duration, t_hat, ds.event, "O"),
            "n_observed": ds.n_events,
            "n_censored": len(ds) - ds.n_events,
        })
    return rows


def prediction_table(model, ds: SurvivalDataset, percentiles=DEFAULT_PERCENTILES) -> dict:
    """Per-row predictions: open probability at the window and ``t(p)`` per percentile."""
    table = {
        "individual_id": ds.individual_id,
        "open_probability": model.predict_open_probability(ds.X),
    }
    for p, t_hat in predict_times(model, ds.X, percentiles).items():
        table[f"t_hat_{p:g}"] = t_hat
    table["duration"] = ds.duration
    table["event"] = ds.event.astype(int)
    return table


@dataclass
class EvaluationReport:
    """Metrics per model, censoring window and percentile."""

    rows: list[dict] = field(default_factory=list)
    failures: dict[str, str] = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    COLUMNS = ("model", "window", "percentile", "auc", "mrad_a", "mrad_o",
               "n_observed", "n_censored")

    def get(self, model, window, percentile) -> dict:
        for row in self.rows:
            if (row["model"] == model and row["window"] == float(window)
                    and row["percentile"] == percentile):
                return row
        raise KeyError((model, window, percentile))

    def metric(self, name, model, window, percentile=5) -> float:
        return self.get(model, window, percentile)[name]

    @property
    def models(self) -> list[str]:
        return list(dict.fromkeys(r["model"] for r in self.rows))

    @property
    def windows(self) -> list[float]:
        return sorted({r["window"] for r in self.rows})

    def best_percentile(self, model, window, metric="mrad_o"):
        rows = [r for r in self.rows if r["model"] == model and r["window"] == float(window)]
        return min(rows, key=lambda r: (r[metric], r["percentile"]))["percentile"]

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        extra = sorted({k for r in self.rows for k in r} - set(self.COLUMNS))
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(list(self.COLUMNS) + extra)
        for row in self.rows:
            writer.writerow([_fmt(row.get(c)) for c in list(self.COLUMNS) + extra])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text

    def to_dict(self) -> dict:
        return {"rows": self.rows, "failures": self.failures, "metadata": self.metadata}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_json_default) + "\n"
        if path is not None:
            Path(path).write_text(text, encoding="utf-8")
        return text


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return "" if value is None else str(value)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _fit_and_score(name, estimator, train, validate, window, percentiles):
    try:
        fitted = clone(estimator).fit(train.X, train.y)
        rows = score_model(fitted, validate, percentiles)
    except Exception as exc:  # reported, not raised: other models still run
        logger.warning("model %s failed at window %g: %s", name, window, exc)
        return name, window, None, f"{type(exc).__name__}: {exc}"
    for row in rows:
        row["model"] = name
        row["window"] = float(window)
    return name, window, rows, None


def evaluate(models: Mapping, train: RawEventLog, validate: RawEventLog,
             windows=DEFAULT_WINDOWS, percentiles=DEFAULT_PERCENTILES,
             n_jobs=None) -> EvaluationReport:
    """Fit every model on ``train`` and score on ``validate`` for each window.

    Parameters
    ----------
    models : mapping of name to unfitted estimator
    train, validate : RawEventLog
        Chronologically separate logs; labels are re-derived per window.
    windows : sequence of float
        Censoring windows in minutes.
    percentiles : sequence of float

    Returns
    -------
    EvaluationReport
        Failed fits are listed in ``failures`` instead of aborting the run.
    """
    n_jobs = n_jobs_from_env() if n_jobs is None else n_jobs
    tasks = []
    for window in windows:
        tr = apply_censoring(train, window)
        va = apply_censoring(validate, window)
        for name, est in models.items():
            tasks.append((name, est, tr, va, window))
    results = Parallel(n_jobs=n_jobs)(
        delayed(_fit_and_score)(name, est, tr, va, w, percentiles)
        for name, est, tr, va, w in tasks
    )
    report = EvaluationReport(metadata={"assumptions": ASSUMPTIONS,
                                        "windows": [float(w) for w in windows],
                                        "percentiles": list(percentiles)})
    for name, window, rows, error in results:
        if error is not None:
            report.failures[f"{name}@{window:g}"] = error
        else:
            report.rows.extend(rows)
    return report


def concatenate_logs(*logs: RawEventLog) -> RawEventLog:
    names = logs[0].feature_names
    if any(log.feature_names != names for log in logs):
        raise ValueError("logs have different feature columns")
    return RawEventLog(
        np.concatenate([log.individual_id for log in logs]),
        np.concatenate([log.receive_ts for log in logs]),
        np.concatenate([log.open_ts for log in logs]),
        np.vstack([log.features for log in logs]),
        names,
    )


def evaluate_out_of_time(models: Mapping, train: RawEventLog, validate: RawEventLog,
                         test: RawEventLog, windows=DEFAULT_WINDOWS,
                         percentiles: Mapping | None = None, n_jobs=None) -> EvaluationReport:
    """Refit on train + validate and score the later test log.

    ``percentiles`` maps ``(model, window)`` to the percentile chosen on the
    validation data; missing entries default to 5.
    """
    combined = concatenate_logs(train, validate)
    percentiles = dict(percentiles or {})
    report = EvaluationReport(metadata={"assumptions": ASSUMPTIONS, "final": True,
                                        "windows": [float(w) for w in windows]})
    for window in windows:
        tr = apply_censoring(combined, window)
        te = apply_censoring(test, window)
        for name, est in models.items():
            p = percentiles.get((name, float(window)), 5)
            _, _, rows, error = _fit_and_score(name, est, tr, te, window, (p,))
            if error is not None:
                report.failures[f"{name}@{window:g}"] = error
            else:
                report.rows.extend(rows)
    return report


def lambda_max(name: str, ds: SurvivalDataset, l1_ratio: float = 1.0) -> float:
    """Smallest penalty that zeroes every coefficient of ``"CPH-L"`` or ``"LR"``.

    Computed on standardised features; ``l1_ratio`` is floored at 1e-3 so the
    value stays finite for ridge-like mixes.
    """
    mean, scale = fit_standardizer(ds.X)
    Xs = (ds.X - mean) / scale
    event = ds.event
    if name == "CPH-L":
        _, grad = CoxPartialLikelihood(Xs, event, ds.duration)(np.zeros(Xs.shape[1]), order=1)
    elif name == "LR":
        grad = Xs.T @ (event - event.mean())
    else:
        raise ValueError(f"lambda_max is defined for CPH-L and LR, not {name!r}")
    return float(np.max(np.abs(grad)) / max(l1_ratio, 1e-3))


def grid_points(grid) -> list[dict]:
    """Expand a ``{name: values}`` grid; a sequence of dicts is used as is."""
    if isinstance(grid, Mapping):
        keys = list(grid)
        return [dict(zip(keys, values)) for values in itertools.product(*(grid[k] for k in keys))]
    return [dict(point) for point in grid]


def grid_search(estimator, grid, train: SurvivalDataset,
                validate: SurvivalDataset, percentile=5):
    """Pick hyper-parameters by validation AUC (earlier grid points win ties).

    Parameters
    ----------
    estimator : estimator or callable
        Either an estimator configured with ``set_params`` or a function
        mapping a parameter dict to a new estimator.
    grid : mapping of name to values, or sequence of dicts
        A mapping is expanded to its Cartesian product.

    Returns
    -------
    best_params : dict
    results : list of dict
        Every grid point with its validation AUC and MRAD(O) at ``percentile``.
    """
    results = []
    best, best_auc = None, -np.inf
    for params in grid_points(grid):
        try:
            if isinstance(estimator, BaseEstimator):
                model = clone(estimator).set_params(**params)
            else:
                model = estimator(params)
            fitted = model.fit(train.X, train.y)
            row = score_model(fitted, validate, (percentile,))[0]
            area, mrad_o = row["auc"], row["mrad_o"]
        except Exception as exc:
            logger.warning("grid point %s failed: %s", params, exc)
            area, mrad_o = float("nan"), float("nan")
        results.append({"params": params, "auc": area, "mrad_o": mrad_o})
        if np.isfinite(area) and area > best_auc:
            best, best_auc = params, area
    if best is None:
        raise RuntimeError("every grid point failed")
    return best, results


def _resample_with_events(rng, ds, max_tries=100):
    for _ in range(max_tries):
        idx = rng.integers(0, len(ds), size=len(ds))
        if ds.event[idx].any():
            return idx
    raise RuntimeError("could not draw a bootstrap sample containing an event")


def _bootstrap_one(estimator, train, validate, idx, percentile):
    sample = train.take(idx)
    fitted = clone(estimator).fit(sample.X, sample.y)
    row = score_model(fitted, validate, (percentile,))[0]
    return row["auc"], row["mrad_o"]


def _sample_std(values):
    # centring on one sample makes identical values give exactly zero
    return float(np.std(values - values[0], ddof=1))


def bootstrap_stability(estimator, train: SurvivalDataset, validate: SurvivalDataset,
                        n=10, seed=0, percentile=5, indices=None, n_jobs=None) -> dict:
    """Refit on bootstrap resamples of ``train`` and score ``validate``.

    Parameters
    ----------
    indices : sequence of index arrays, optional
        Explicit resamples replacing the random draws.

    Returns
    -------
    dict
        ``{"auc": (mean, std), "mrad_o": (mean, std), "samples": [...]}``
        with sample standard deviations.
    """
    if indices is None:
        if n < 2:
            raise ValueError("bootstrap needs n >= 2")
        rng = np.random.default_rng(seed)
        indices = [_resample_with_events(rng, train) for _ in range(n)]
    indices = [np.asarray(i) for i in indices]
    if len(indices) < 2:
        raise ValueError("bootstrap needs at least two samples")
    n_jobs = n_jobs_from_env() if n_jobs is None else n_jobs
    scores = Parallel(n_jobs=n_jobs)(
        delayed(_bootstrap_one)(estimator, train, validate, idx, percentile)
        for idx in indices
    )
    aucs = np.array([s[0] for s in scores])
    mrads = np.array([s[1] for s in scores])
    return {
        "auc": (float(aucs.mean()), _sample_std(aucs)),
        "mrad_o": (float(mrads.mean()), _sample_std(mrads)),
        "samples": [{"auc": float(a), "mrad_o": float(m)} for a, m in zip(aucs, mrads)],
    }
