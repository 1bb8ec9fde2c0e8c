"""Censored observations, censoring windows, risk sets and CSV ingestion.

Durations are kept in minutes. Raw logs carry epoch-second timestamps and
are turned into survival data by :func:`apply_censoring`.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

logger = logging.getLogger(__name__)

RAW_COLUMNS = ("individual_id", "receive_ts", "open_ts")
DATASET_COLUMNS = ("individual_id", "duration", "event")

#: Durations below this (in minutes) are clamped so relative deviations stay finite.
DEFAULT_EPSILON = 0.5

SURV_DTYPE = np.dtype([("event", bool), ("time", np.float64)])


class SchemaError(ValueError):
    """Raised when a CSV file does not follow the expected layout."""


def make_survival_array(event, time):
    """Pack event indicators and durations into a structured array.

    Parameters
    ----------
    event : array-like of bool, shape (n_samples,)
    time : array-like of float, shape (n_samples,)

    Returns
    -------
    y : structured ndarray with fields ``event`` and ``time``
    """
    event = np.asarray(event, dtype=bool).ravel()
    time = np.asarray(time, dtype=np.float64).ravel()
    if event.shape != time.shape:
        raise ValueError(
            f"event and time have different lengths: {event.shape[0]} != {time.shape[0]}"
        )
    y = np.empty(event.shape[0], dtype=SURV_DTYPE)
    y["event"] = event
    y["time"] = time
    return y


def check_survival_y(y):
    """Return ``(event, time)`` arrays from a survival target.

    Accepts a structured array (see :func:`make_survival_array`) or a
    two-column array ``[event, time]``.
    """
    if isinstance(y, np.ndarray) and y.dtype.names is not None:
        names = y.dtype.names
        if "event" not in names or "time" not in names:
            raise ValueError(f"structured y needs fields 'event' and 'time', got {names}")
        event = np.asarray(y["event"], dtype=bool)
        time = np.asarray(y["time"], dtype=np.float64)
    else:
        arr = np.asarray(y, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("y must be a structured array or have shape (n_samples, 2)")
        event = arr[:, 0].astype(bool)
        time = arr[:, 1]
    if not np.all(np.isfinite(time)):
        raise ValueError("survival times must be finite")
    if np.any(time < 0):
        raise ValueError("survival times must be non-negative")
    return event, time


@dataclass(frozen=True)
class SurvivalRecord:
    individual_id: str
    features: np.ndarray
    duration: float
    event: bool


@dataclass(frozen=True)
class RawEventLog:
    """Receive/open timestamps (epoch seconds) plus per-row features.

    ``open_ts`` is NaN for emails never seen opened.
    """

    individual_id: np.ndarray
    receive_ts: np.ndarray
    open_ts: np.ndarray
    features: np.ndarray
    feature_names: tuple[str, ...]

    def __post_init__(self):
        ids = np.asarray(self.individual_id).astype(str)
        receive = np.asarray(self.receive_ts, dtype=np.float64)
        opened = np.asarray(self.open_ts, dtype=np.float64)
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim == 1:
            feats = feats.reshape(-1, max(len(self.feature_names), 1) if feats.size else 0)
        n = ids.shape[0]
        if receive.shape != (n,) or opened.shape != (n,) or feats.shape[0] != n:
            raise ValueError("RawEventLog columns must have the same number of rows")
        if feats.shape[1] != len(self.feature_names):
            raise ValueError(
                f"{len(self.feature_names)} feature names for {feats.shape[1]} feature columns"
            )
        if not np.all(np.isfinite(receive)):
            raise ValueError("receive_ts must be finite")
        seen = ~np.isnan(opened)
        bad = np.flatnonzero(seen & (opened < receive))
        if bad.size:
            raise ValueError(f"open_ts precedes receive_ts in row {int(bad[0])}")
        object.__setattr__(self, "individual_id", ids)
        object.__setattr__(self, "receive_ts", receive)
        object.__setattr__(self, "open_ts", opened)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))

    def __len__(self):
        return self.individual_id.shape[0]

    def take(self, index) -> "RawEventLog":
        index = np.asarray(index)
        return RawEventLog(
            self.individual_id[index],
            self.receive_ts[index],
            self.open_ts[index],
            self.features[index],
            self.feature_names,
        )


@dataclass(frozen=True)
class SurvivalDataset:
    """Column-oriented censored data sharing one censoring window (minutes)."""

    individual_id: np.ndarray
    features: np.ndarray
    duration: np.ndarray
    event: np.ndarray
    censoring_window: float
    feature_names: tuple[str, ...]
    rejected_rows: tuple[int, ...] = field(default=())

    def __post_init__(self):
        ids = np.asarray(self.individual_id).astype(str)
        feats = np.asarray(self.features, dtype=np.float64)
        dur = np.asarray(self.duration, dtype=np.float64)
        ev = np.asarray(self.event, dtype=bool)
        window = float(self.censoring_window)
        n = ids.shape[0]
        if feats.ndim != 2 or feats.shape[0] != n or dur.shape != (n,) or ev.shape != (n,):
            raise ValueError("SurvivalDataset columns must have the same number of rows")
        if feats.shape[1] != len(self.feature_names):
            raise ValueError(
                f"{len(self.feature_names)} feature names for {feats.shape[1]} feature columns"
            )
        if not window > 0 or not math.isfinite(window):
            raise ValueError(f"censoring_window must be positive and finite, got {window}")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features contain non-finite values")
        if not np.all(np.isfinite(dur)) or np.any(dur < 0):
            raise ValueError("durations must be finite and non-negative")
        if np.any(dur[ev] >= window):
            raise ValueError("event rows must have duration < censoring_window")
        if np.any(dur[~ev] != window):
            raise ValueError("censored rows must have duration == censoring_window")
        for name, value in (("individual_id", ids), ("features", feats),
                            ("duration", dur), ("event", ev)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, "censoring_window", window)
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "rejected_rows", tuple(int(i) for i in self.rejected_rows))

    def __len__(self):
        return self.duration.shape[0]

    def __getitem__(self, i) -> SurvivalRecord:
        return SurvivalRecord(
            self.individual_id[i], self.features[i], float(self.duration[i]), bool(self.event[i])
        )

    @property
    def X(self) -> np.ndarray:
        return self.features

    @property
    def y(self) -> np.ndarray:
        return make_survival_array(self.event, self.duration)

    @property
    def n_events(self) -> int:
        return int(self.event.sum())

    def column(self, name: str) -> np.ndarray:
        try:
            return self.features[:, self.feature_names.index(name)]
        except ValueError:
            raise KeyError(f"no feature named {name!r}") from None

    def take(self, index) -> "SurvivalDataset":
        index = np.asarray(index)
        return SurvivalDataset(
            self.individual_id[index],
            self.features[index],
            self.duration[index],
            self.event[index],
            self.censoring_window,
            self.feature_names,
        )


def apply_censoring(log: RawEventLog, window: float, epsilon: float = DEFAULT_EPSILON
                    ) -> SurvivalDataset:
    """Derive durations and event indicators for one censoring window.

    An open counts as an event only when it happens strictly before
    ``window`` minutes after receipt; every other row is censored at
    ``window``. Rows with non-finite features are dropped and reported.

    Parameters
    ----------
    log : RawEventLog
    window : float
        Censoring window in minutes.
    epsilon : float, default 0.5
        Event durations below this are raised to it.

    Returns
    -------
    SurvivalDataset
    """
    window = float(window)
    if not window > 0 or not math.isfinite(window):
        raise ValueError(f"censoring window must be positive and finite, got {window}")
    if len(log) == 0:
        raise ValueError("cannot censor an empty event log")
    if not 0 < epsilon < window:
        raise ValueError("epsilon must lie in (0, window)")

    finite = np.all(np.isfinite(log.features), axis=1)
    rejected = np.flatnonzero(~finite)
    if rejected.size:
        logger.warning(
            "dropping %d row(s) with non-finite features (first rows: %s)",
            rejected.size, rejected[:5].tolist(),
        )
    keep = np.flatnonzero(finite)
    if keep.size == 0:
        raise ValueError("every row has non-finite features")

    elapsed = (log.open_ts[keep] - log.receive_ts[keep]) / 60.0
    with np.errstate(invalid="ignore"):
        event = ~np.isnan(elapsed) & (elapsed < window)
    duration = np.full(keep.size, window)
    duration[event] = np.maximum(elapsed[event], epsilon)
    return SurvivalDataset(
        log.individual_id[keep],
        log.features[keep],
        duration,
        event,
        window,
        log.feature_names,
        rejected_rows=tuple(rejected.tolist()),
    )


def risk_set_sizes(ds: SurvivalDataset) -> dict[float, int]:
    """Number of rows still at risk (duration >= t) at each distinct event time."""
    if len(ds) == 0:
        raise ValueError("empty dataset")
    times = np.sort(ds.duration)
    event_times = np.unique(ds.duration[ds.event])
    at_risk = times.size - np.searchsorted(times, event_times, side="left")
    return {float(t): int(n) for t, n in zip(event_times, at_risk)}


def _fmt(value: float) -> str:
    if math.isnan(value):
        return ""
    return repr(float(value))


def save_csv(obj: RawEventLog | SurvivalDataset, path) -> None:
    """Write a raw event log or a censored dataset as UTF-8 CSV.

    Floats are written with ``repr`` so that :func:`load_csv` restores them
    bit for bit.
    """
    path = Path(path)
    if isinstance(obj, RawEventLog):
        header = list(RAW_COLUMNS) + list(obj.feature_names)
        rows = (
            [obj.individual_id[i], _fmt(obj.receive_ts[i]), _fmt(obj.open_ts[i])]
            + [_fmt(v) for v in obj.features[i]]
            for i in range(len(obj))
        )
    elif isinstance(obj, SurvivalDataset):
        header = list(DATASET_COLUMNS) + list(obj.feature_names)
        rows = (
            [obj.individual_id[i], _fmt(obj.duration[i]), "1" if obj.event[i] else "0"]
            + [_fmt(v) for v in obj.features[i]]
            for i in range(len(obj))
        )
    else:
        raise TypeError(f"cannot save object of type {type(obj).__name__}")
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _parse_float(text: str, row: int, column: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SchemaError(f"row {row}, column {column!r}: unparseable {what} {text!r}") from None


def load_csv(path, censoring_window: float | None = None) -> RawEventLog | SurvivalDataset:
    """Read a CSV written in either the raw-log or the dataset layout.

    The raw layout is ``individual_id,receive_ts,open_ts,<features...>`` with
    an empty ``open_ts`` for never-opened rows. The dataset layout is
    ``individual_id,duration,event,<features...>``; its censoring window is
    taken from ``censoring_window`` or, failing that, from the censored rows.
    """
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: missing header row") from None
        dupes = sorted({c for c in header if header.count(c) > 1})
        if dupes:
            raise SchemaError(f"{path}: duplicate header column(s) {dupes}")
        if tuple(header[:3]) == RAW_COLUMNS:
            kind = "raw"
        elif tuple(header[:3]) == DATASET_COLUMNS:
            kind = "dataset"
        else:
            missing = [c for c in RAW_COLUMNS if c not in header]
            raise SchemaError(
                f"{path}: header must start with {','.join(RAW_COLUMNS)} "
                f"(or {','.join(DATASET_COLUMNS)}); missing column(s) {missing}"
            )
        feature_names = tuple(header[3:])
        width = len(header)
        ids, first, second, feats = [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise SchemaError(f"row {lineno}: expected {width} fields, got {len(row)}")
            ids.append(row[0])
            if kind == "raw":
                first.append(_parse_float(row[1], lineno, "receive_ts", "timestamp"))
                second.append(
                    math.nan if row[2] == "" else
                    _parse_float(row[2], lineno, "open_ts", "timestamp")
                )
            else:
                first.append(_parse_float(row[1], lineno, "duration", "duration"))
                if row[2] not in ("0", "1"):
                    raise SchemaError(f"row {lineno}, column 'event': expected 0 or 1, got {row[2]!r}")
                second.append(row[2] == "1")
            feats.append([
                _parse_float(v, lineno, name, "feature") if v != "" else math.nan
                for v, name in zip(row[3:], feature_names)
            ])

    features = np.asarray(feats, dtype=np.float64).reshape(len(ids), len(feature_names))
    if kind == "raw":
        return RawEventLog(np.asarray(ids), np.asarray(first), np.asarray(second),
                           features, feature_names)
    duration = np.asarray(first)
    event = np.asarray(second, dtype=bool)
    if censoring_window is None:
        if event.all():
            raise SchemaError(f"{path}: no censored rows; pass censoring_window explicitly")
        censoring_window = float(duration[~event][0])
    return SurvivalDataset(np.asarray(ids), features, duration, event,
                           censoring_window, feature_names)


def records_to_dataset(records: Sequence[SurvivalRecord], censoring_window: float,
                       feature_names: Sequence[str]) -> SurvivalDataset:
    """Build a dataset from individual records."""
    if not records:
        raise ValueError("no records")
    return SurvivalDataset(
        np.array([r.individual_id for r in records]),
        np.vstack([np.asarray(r.features, dtype=np.float64) for r in records]),
        np.array([r.duration for r in records]),
        np.array([r.event for r in records]),
        censoring_window,
        tuple(feature_names),
    )
