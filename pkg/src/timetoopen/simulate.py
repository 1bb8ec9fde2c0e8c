"""Seeded synthetic email campaigns with a never-opening subpopulation.

Each recipient has static features, a latent engagement level and a
history of earlier sends from which behavioural features are computed.
Every email independently lands in the prone class with probability
``expit(b0 + static @ b + engagement)``; prone emails are opened after a
piecewise-exponential time scaled by ``exp(static @ beta)``, and opens later
than the monitoring horizon go unseen.
"""
from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from .data import RawEventLog

SECONDS_PER_WEEK = 7 * 24 * 3600
CHUNK = 1024
STATIC_DISTRIBUTIONS = ("normal", "uniform")


@dataclass(frozen=True)
class GeneratorConfig:
    """Parameters of the synthetic corpus.

    ``incidence_coef`` and ``latency_coef`` act on the static features, in
    the order of ``static_features``; each static feature is standard normal
    or uniform on [0, 1] as given by ``static_distributions``. Baseline rates
    are per minute on the intervals ``[0, k1), [k1, k2), ..., [k_last, inf)``
    of ``baseline_knots``. The latent engagement added to the incidence
    logit is normal with standard deviation ``engagement_scale`` or uniform on
    ``[-engagement_scale, engagement_scale]``.
    """

    n_recipients: int = 20_000
    n_emails_per_recipient: int = 15
    n_weeks: int = 13
    static_features: tuple[str, ...] = ("tenure", "mobile_share")
    static_distributions: tuple[str, ...] = ("normal", "uniform")
    incidence_intercept: float = -2.668
    incidence_coef: tuple[float, ...] = (0.3, -0.3)
    engagement_distribution: str = "uniform"
    engagement_scale: float = 2.0
    latency_coef: tuple[float, ...] = (-0.15, 0.3)
    baseline_knots: tuple[float, ...] = (60.0, 180.0, 360.0, 720.0)
    baseline_rates: tuple[float, ...] = (0.00453, 0.00206, 0.0013, 0.00114, 0.000182)
    monitor_horizon: float = 14_400.0
    burnin_min: int = 30
    burnin_max: int = 60
    click_probability: float = 0.3
    behavioral_features: bool = True
    start_ts: int = 1_483_228_800
    seed: int = 0

    def __post_init__(self):
        k = len(self.static_features)
        if len(self.incidence_coef) != k or len(self.latency_coef) != k:
            raise ValueError("incidence_coef and latency_coef need one value per static feature")
        if len(self.static_distributions) != k or \
                set(self.static_distributions) - set(STATIC_DISTRIBUTIONS):
            raise ValueError(f"static_distributions needs one of {STATIC_DISTRIBUTIONS} "
                             "per static feature")
        if len(self.baseline_rates) != len(self.baseline_knots) + 1:
            raise ValueError("need one more baseline rate than knots")
        if any(r <= 0 for r in self.baseline_rates):
            raise ValueError("baseline rates must be positive")
        if any(b <= a for a, b in zip(self.baseline_knots, self.baseline_knots[1:])) or \
                (self.baseline_knots and self.baseline_knots[0] <= 0):
            raise ValueError("baseline knots must be positive and increasing")
        if self.n_recipients < 1 or self.n_emails_per_recipient < 1:
            raise ValueError("need at least one recipient and one email")
        if not 0 <= self.burnin_min <= self.burnin_max:
            raise ValueError("burn-in bounds must satisfy 0 <= min <= max")
        if self.behavioral_features and self.burnin_min < 1:
            raise ValueError("behavioural features need at least one burn-in email")
        if self.engagement_distribution not in STATIC_DISTRIBUTIONS:
            raise ValueError(f"engagement_distribution must be one of {STATIC_DISTRIBUTIONS}")
        if self.engagement_scale < 0:
            raise ValueError("engagement_scale must be non-negative")
        if self.monitor_horizon <= 0 or self.n_weeks < 1:
            raise ValueError("monitor_horizon and n_weeks must be positive")

    @property
    def true_b(self) -> np.ndarray:
        return np.r_[self.incidence_intercept, self.incidence_coef]

    @property
    def true_beta(self) -> np.ndarray:
        return np.asarray(self.latency_coef, dtype=np.float64)

    @property
    def feature_names(self) -> tuple[str, ...]:
        behavioural = (("hist_received", "hist_open_rate", "hist_clicks", "last_opened")
                       if self.behavioral_features else ())
        return behavioural + tuple(self.static_features)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class GroundTruth:
    """Hidden per-row quantities; never part of the event log."""

    individual_id: np.ndarray
    prone: np.ndarray
    pi: np.ndarray
    psi: np.ndarray
    latent_time: np.ndarray = field(repr=False)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["row", "individual_id", "L", "pi", "psi"])
            for i in range(self.individual_id.size):
                writer.writerow([i, self.individual_id[i], int(self.prone[i]),
                                 repr(float(self.pi[i])), repr(float(self.psi[i]))])


class PiecewiseExponential:
    """Piecewise-constant hazard with ``rates[k]`` on ``[knots[k-1], knots[k])``."""

    def __init__(self, knots, rates):
        self.knots = np.r_[0.0, np.asarray(knots, dtype=np.float64)]
        self.rates = np.asarray(rates, dtype=np.float64)
        self.cum_at_knots = np.r_[0.0, np.cumsum(np.diff(self.knots) * self.rates[:-1])]

    def cumulative_hazard(self, t):
        t = np.asarray(t, dtype=np.float64)
        last = self.knots[-1]
        inside = np.interp(np.minimum(t, last), self.knots, self.cum_at_knots)
        return inside + np.maximum(t - last, 0.0) * self.rates[-1]

    def survival(self, t, psi=1.0):
        return np.exp(-self.cumulative_hazard(t) * psi)

    def inverse(self, h):
        """Time at which the cumulative hazard reaches ``h``."""
        h = np.asarray(h, dtype=np.float64)
        top = self.cum_at_knots[-1]
        inside = np.interp(np.minimum(h, top), self.cum_at_knots, self.knots)
        return inside + np.maximum(h - top, 0.0) / self.rates[-1]

    def sample(self, rng, psi):
        return self.inverse(rng.standard_exponential(np.shape(psi)) / psi)


def _chunk(config: GeneratorConfig, index: int, baseline: PiecewiseExponential):
    rng = np.random.default_rng([config.seed, index])
    m, k = CHUNK, len(config.static_features)
    normal = np.array([d == "normal" for d in config.static_distributions])
    static = np.where(normal, rng.standard_normal((m, k)), rng.random((m, k)))
    if config.engagement_distribution == "normal":
        engagement = config.engagement_scale * rng.standard_normal(m)
    else:
        engagement = config.engagement_scale * rng.uniform(-1.0, 1.0, m)
    pi = expit(config.incidence_intercept + static @ np.asarray(config.incidence_coef)
               + engagement)
    psi = np.exp(static @ config.true_beta)

    # burn-in history
    hb = max(config.burnin_max, 1)
    n_burn = rng.integers(config.burnin_min, config.burnin_max + 1, size=m)
    burn_prone = rng.random((m, hb)) < pi[:, None]
    burn_time = baseline.sample(rng, np.broadcast_to(psi[:, None], (m, hb)))
    burn_click = rng.random((m, hb)) < config.click_probability
    sent = np.arange(hb)[None, :] < n_burn[:, None]
    burn_open = sent & burn_prone & (burn_time < config.monitor_horizon)
    opens = burn_open.sum(axis=1)
    clicks = (burn_open & burn_click).sum(axis=1)
    last_idx = np.maximum(n_burn - 1, 0)
    last_opened = burn_open[np.arange(m), last_idx] & (n_burn > 0)

    # campaign emails
    e = config.n_emails_per_recipient
    span = config.n_weeks * SECONDS_PER_WEEK
    offsets = np.sort(rng.integers(0, span, size=(m, e)), axis=1)
    prone = rng.random((m, e)) < pi[:, None]
    latent = baseline.sample(rng, np.broadcast_to(psi[:, None], (m, e)))

    if config.behavioral_features:
        rate = np.divide(opens, n_burn, out=np.zeros(m), where=n_burn > 0)
        behavioural = np.column_stack([n_burn, rate, clicks, last_opened.astype(float)])
        features = np.column_stack([behavioural, static])
    else:
        features = static
    return features, pi, psi, offsets, prone, latent


def generate(config: GeneratorConfig | None = None) -> tuple[RawEventLog, GroundTruth]:
    """Simulate a raw event log and its hidden ground truth.

    Recipients are generated in fixed-size blocks, each from its own seeded
    stream, so the first ``n`` recipients do not depend on ``n_recipients``.
    """
    config = config or GeneratorConfig()
    baseline = PiecewiseExponential(config.baseline_knots, config.baseline_rates)
    n_chunks = -(-config.n_recipients // CHUNK)
    parts = [_chunk(config, c, baseline) for c in range(n_chunks)]
    n, e = config.n_recipients, config.n_emails_per_recipient

    def stack(i):
        return np.concatenate([p[i] for p in parts])[:n]

    features, pi, psi = stack(0), stack(1), stack(2)
    offsets, prone, latent = stack(3), stack(4), stack(5)
    if not prone.any():
        raise ValueError("configuration produced no prone emails")

    ids = np.repeat(np.array([f"r{i:06d}" for i in range(n)]), e)
    receive = (config.start_ts + offsets).ravel().astype(np.float64)
    latent = latent.ravel()
    seen = prone.ravel() & (latent < config.monitor_horizon)
    open_ts = np.full(receive.size, np.nan)
    open_ts[seen] = receive[seen] + np.round(latent[seen] * 60.0)
    log = RawEventLog(ids, receive, open_ts, np.repeat(features, e, axis=0),
                      config.feature_names)
    truth = GroundTruth(ids, prone.ravel(), np.repeat(pi, e), np.repeat(psi, e),
                        np.where(prone.ravel(), latent, np.inf))
    return log, truth


@dataclass(frozen=True)
class SplitScheme:
    """Consecutive week spans: train, validate, an unused gap, then test."""

    train_weeks: float = 4
    validate_weeks: float = 3
    gap_weeks: float = 3
    test_weeks: float = 3

    def __post_init__(self):
        for name in ("train_weeks", "validate_weeks", "test_weeks"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.gap_weeks < 0:
            raise ValueError("gap_weeks must be non-negative")

    @property
    def total_weeks(self) -> float:
        return self.train_weeks + self.validate_weeks + self.gap_weeks + self.test_weeks


def split_chronological(log: RawEventLog, scheme: SplitScheme | None = None, origin=None):
    """Split a log by receive time into ``(train, validate, test)``.

    Rows received during the gap are dropped. ``origin`` defaults to the
    earliest receive time.
    """
    scheme = scheme or SplitScheme()
    if len(log) == 0:
        raise ValueError("empty log")
    origin = float(log.receive_ts.min()) if origin is None else float(origin)
    weeks = (log.receive_ts - origin) / SECONDS_PER_WEEK
    available = np.ceil(weeks.max()) if weeks.max() > 0 else 1.0
    if scheme.total_weeks > available + 1e-9:
        raise ValueError(
            f"split scheme spans {scheme.total_weeks} weeks but the log covers {available:g}"
        )
    bounds = np.cumsum([0.0, scheme.train_weeks, scheme.validate_weeks, scheme.gap_weeks,
                        scheme.test_weeks])
    train = np.flatnonzero((weeks >= bounds[0]) & (weeks < bounds[1]))
    validate = np.flatnonzero((weeks >= bounds[1]) & (weeks < bounds[2]))
    test = np.flatnonzero((weeks >= bounds[3]) & (weeks < bounds[4] + 1e-12))
    return log.take(train), log.take(validate), log.take(test)


def filter_recipients(log: RawEventLog, min_messages: int = 10) -> RawEventLog:
    """Drop recipients with fewer than ``min_messages`` rows."""
    ids, inverse, counts = np.unique(log.individual_id, return_inverse=True, return_counts=True)
    return log.take(np.flatnonzero(counts[inverse] >= min_messages))
