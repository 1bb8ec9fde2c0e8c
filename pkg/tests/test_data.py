import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from timetoopen.data import (RawEventLog, SchemaError, SurvivalDataset, apply_censoring,
                             load_csv, make_survival_array, risk_set_sizes, save_csv)

from conftest import make_dataset


def _log(minutes_to_open, features=None):
    n = len(minutes_to_open)
    receive = np.arange(n, dtype=float) * 1000.0
    opened = np.array([receive[i] + m * 60.0 if m is not None else np.nan
                       for i, m in enumerate(minutes_to_open)])
    feats = np.zeros((n, 1)) if features is None else np.asarray(features, dtype=float)
    return RawEventLog([f"u{i}" for i in range(n)], receive, opened, feats, ("x",))


class TestApplyCensoring:
    def test_open_inside_window(self):
        ds = apply_censoring(_log([120]), 180)
        assert ds.duration[0] == 120 and ds.event[0]

    def test_open_after_window(self):
        ds = apply_censoring(_log([240]), 180)
        assert ds.duration[0] == 180 and not ds.event[0]

    def test_never_opened(self):
        ds = apply_censoring(_log([None]), 720)
        assert ds.duration[0] == 720 and not ds.event[0]

    def test_open_exactly_at_window_is_censored(self):
        ds = apply_censoring(_log([180]), 180)
        assert not ds.event[0]

    def test_zero_duration_clamped(self):
        ds = apply_censoring(_log([0.0]), 180)
        assert ds.event[0] and ds.duration[0] == 0.5

    def test_nonfinite_features_rejected(self, caplog):
        ds = apply_censoring(_log([10, 20, None], [[1.0], [np.nan], [2.0]]), 60)
        assert len(ds) == 2
        assert ds.rejected_rows == (1,)
        assert "non-finite" in caplog.text

    def test_empty_log(self):
        with pytest.raises(ValueError):
            apply_censoring(_log([]), 60)

    def test_bad_window(self):
        with pytest.raises(ValueError):
            apply_censoring(_log([1]), 0)

    def test_changing_window_rederives(self):
        log = _log([30, 200, 500, None])
        assert apply_censoring(log, 180).event.tolist() == [True, False, False, False]
        assert apply_censoring(log, 720).event.tolist() == [True, True, True, False]


class TestRiskSetSizes:
    def test_all_events(self):
        assert risk_set_sizes(make_dataset([1, 2, 3], [1, 1, 1])) == {1.0: 3, 2.0: 2, 3.0: 1}

    def test_ties(self):
        assert risk_set_sizes(make_dataset([5, 5], [1, 1])) == {5.0: 2}

    def test_censored_row_counts(self):
        assert risk_set_sizes(make_dataset([1, 3], [1, 0])) == {1.0: 2}


class TestDatasetInvariants:
    def test_event_at_window_rejected(self):
        with pytest.raises(ValueError):
            make_dataset([5, 5], [1, 0], window=5)

    def test_censored_off_window_rejected(self):
        with pytest.raises(ValueError):
            make_dataset([1, 3], [1, 0], window=4)

    def test_nonfinite_feature_rejected(self):
        with pytest.raises(ValueError):
            make_dataset([1, 3], [1, 0], X=[[np.inf], [0]])

    def test_immutable(self):
        ds = make_dataset([1, 3], [1, 0])
        with pytest.raises(ValueError):
            ds.duration[0] = 2.0

    def test_survival_array_length_mismatch(self):
        with pytest.raises(ValueError):
            make_survival_array([True], [1.0, 2.0])


class TestCSV:
    def test_raw_round_trip(self, tmp_path):
        log = _log([1.25, None, 0.1 + 0.2], [[0.1], [1 / 3], [-2.5e-12]])
        path = tmp_path / "log.csv"
        save_csv(log, path)
        back = load_csv(path)
        assert isinstance(back, RawEventLog)
        np.testing.assert_array_equal(back.features, log.features)
        np.testing.assert_array_equal(back.open_ts, log.open_ts)
        assert back.feature_names == log.feature_names

    def test_dataset_round_trip(self, tmp_path):
        ds = make_dataset([1 / 3, 7.0], [1, 0], X=[[0.1], [np.pi]])
        path = tmp_path / "ds.csv"
        save_csv(ds, path)
        back = load_csv(path)
        assert isinstance(back, SurvivalDataset)
        np.testing.assert_array_equal(back.duration, ds.duration)
        np.testing.assert_array_equal(back.X, ds.X)
        assert back.censoring_window == ds.censoring_window

    def test_three_rows_with_missing_open(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("individual_id,receive_ts,open_ts,f\n"
                        "a,0,60,1\nb,0,,2\nc,10,70,3\n", encoding="utf-8")
        log = load_csv(path)
        assert len(log) == 3 and math.isnan(log.open_ts[1])

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("id,receive,open\nx,0,1\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="individual_id"):
            load_csv(path)

    def test_duplicate_header(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("individual_id,receive_ts,open_ts,f,f\nx,0,1,1,1\n", encoding="utf-8")
        with pytest.raises(SchemaError, match="duplicate"):
            load_csv(path)

    def test_bad_timestamp_names_row_and_column(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("individual_id,receive_ts,open_ts\nx,0,1\ny,noon,\n", encoding="utf-8")
        with pytest.raises(SchemaError, match=r"row 3, column 'receive_ts'"):
            load_csv(path)

    def test_open_before_receive(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("individual_id,receive_ts,open_ts\nx,100,50\n", encoding="utf-8")
        with pytest.raises(ValueError, match="precedes"):
            load_csv(path)


minutes = st.one_of(st.none(), st.floats(0, 2000, allow_nan=False))


@settings(max_examples=60, deadline=None)
@given(st.lists(minutes, min_size=1, max_size=30),
       st.floats(1, 1000), st.floats(1, 1000))
def test_event_sets_nested_in_window(opens, w1, w2):
    lo, hi = sorted((w1, w2))
    log = _log(opens)
    assert np.all(apply_censoring(log, lo).event <= apply_censoring(log, hi).event)


@settings(max_examples=60, deadline=None)
@given(st.lists(minutes, min_size=1, max_size=30), st.floats(1, 1000))
def test_censoring_idempotent(opens, window):
    log = _log(opens)
    a, b = apply_censoring(log, window), apply_censoring(log, window)
    np.testing.assert_array_equal(a.duration, b.duration)
    np.testing.assert_array_equal(a.event, b.event)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 20), st.booleans()), min_size=1, max_size=30))
def test_risk_set_sizes_decrease(rows):
    duration = np.array([r[0] for r in rows], dtype=float)
    event = np.array([r[1] for r in rows])
    duration[~event] = 21.0
    if not event.any():
        return
    sizes = list(risk_set_sizes(make_dataset(duration, event, window=21.0)).values())
    assert all(a > b for a, b in zip(sizes, sizes[1:]))
