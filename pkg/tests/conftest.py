import warnings

import numpy as np
import pytest

from timetoopen.data import SurvivalDataset, apply_censoring
from timetoopen.simulate import GeneratorConfig, generate, split_chronological

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


def make_dataset(duration, event, X=None, window=None, names=None):
    """Small in-memory dataset; censored rows must sit at ``window``."""
    duration = np.asarray(duration, dtype=float)
    event = np.asarray(event, dtype=bool)
    if window is None:
        window = duration[~event].max() if (~event).any() else duration.max() + 1.0
    if X is None:
        X = np.zeros((duration.size, 1))
    X = np.asarray(X, dtype=float).reshape(duration.size, -1)
    names = names or tuple(f"x{j}" for j in range(X.shape[1]))
    ids = [f"i{k}" for k in range(duration.size)]
    return SurvivalDataset(ids, X, duration, event, window, names)


def ph_config(n, seed, beta=(0.8, -0.5), rate=0.01):
    """Everyone prone, two standard normal features, exponential baseline."""
    return GeneratorConfig(
        n_recipients=n, n_emails_per_recipient=1, static_distributions=("normal", "normal"),
        incidence_intercept=20.0, incidence_coef=(0.0, 0.0), engagement_scale=0.0,
        latency_coef=beta, baseline_knots=(), baseline_rates=(rate,),
        behavioral_features=False, burnin_min=0, burnin_max=0, n_weeks=1, seed=seed,
    )


@pytest.fixture(scope="session")
def small_corpus():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        log, truth = generate(GeneratorConfig(n_recipients=1200, seed=3))
    return log, truth


@pytest.fixture(scope="session")
def small_splits(small_corpus):
    return split_chronological(small_corpus[0])


@pytest.fixture(scope="session")
def small_train(small_splits):
    return apply_censoring(small_splits[0], 720)


@pytest.fixture(scope="session")
def small_validate(small_splits):
    return apply_censoring(small_splits[1], 720)
