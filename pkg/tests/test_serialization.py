import json
import warnings

import numpy as np
import pytest

from timetoopen.baselines import (ConstantTimeBaseline, LinearTimeBaseline, LogisticBaseline,
                                  OpenRateBaseline, SplitTaskModel)
from timetoopen.boosting import CoxBoost
from timetoopen.cox import CoxPHElasticNet
from timetoopen.cure import MixtureCureCox
from timetoopen.data import make_survival_array
from timetoopen.serialization import (FORMAT_VERSION, ModelFormatError, dumps, load_model,
                                      load_provenance, save_model)


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 3))
    X[:, 2] = rng.random(300)
    t = rng.exponential(1.0 / (0.02 * np.exp(X[:, :2] @ [0.6, -0.3])))
    event = (t < 60) & (rng.random(300) < 0.7)
    return X, make_survival_array(event, np.where(event, t, 60.0))


MODELS = {
    "cox": lambda: CoxPHElasticNet(penalty=0.01, l1_ratio=0.5),
    "boost": lambda: CoxBoost(n_estimators=8, min_samples_leaf=20),
    "cure": lambda: MixtureCureCox(max_iter=20),
    "rate": lambda: OpenRateBaseline(column=2),
    "constant": ConstantTimeBaseline,
    "logistic": LogisticBaseline,
    "linear": LinearTimeBaseline,
    "split": lambda: SplitTaskModel(LogisticBaseline(), LinearTimeBaseline()),
}


def _fit(name, X, y):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return MODELS[name]().fit(X, y)


def _outputs(model, X):
    out = []
    if hasattr(model, "predict_open_probability"):
        out.append(model.predict_open_probability(X))
    if hasattr(model, "predict_time"):
        out.append(model.predict_time(X))
    if hasattr(model, "predict_survival"):
        out.append(model.predict_survival(X, 30.0))
    return out


@pytest.mark.parametrize("name", sorted(MODELS))
def test_round_trip_predicts_identically(name, data, tmp_path):
    X, y = data
    model = _fit(name, X, y)
    save_model(model, tmp_path / "m.json")
    loaded = load_model(tmp_path / "m.json")
    assert type(loaded) is type(model)
    assert repr(loaded) == repr(model)
    before, after = _outputs(model, X), _outputs(loaded, X)
    assert before and len(before) == len(after)
    for a, b in zip(before, after):
        np.testing.assert_array_equal(a, b)
    assert dumps(loaded) == dumps(model)


def test_container_fields(data):
    X, y = data
    doc = json.loads(dumps(_fit("cure", X, y), provenance={"seed": 7}))
    assert doc["format"] == "timetoopen-model" and doc["format_version"] == FORMAT_VERSION
    assert doc["model_type"] == "MixtureCureCox"
    assert "em_trace_" in doc["state"] and doc["provenance"] == {"seed": 7}


def test_cox_container_contents(data):
    X, y = data
    state = json.loads(dumps(_fit("cox", X, y)))["state"]
    assert {"coef_", "mean_", "scale_", "baseline_"} <= set(state)


def test_provenance(data, tmp_path):
    X, y = data
    save_model(_fit("constant", X, y), tmp_path / "a.json", provenance={"config": {"C": 60}})
    save_model(_fit("constant", X, y), tmp_path / "b.json")
    assert load_provenance(tmp_path / "a.json") == {"config": {"C": 60}}
    assert load_provenance(tmp_path / "b.json") is None


@pytest.mark.parametrize("edit,match", [
    (lambda d: d.update(format="other"), "not a timetoopen"),
    (lambda d: d.update(format_version=FORMAT_VERSION + 1), "version"),
    (lambda d: d.update(model_type="Forest"), "unknown model"),
])
def test_rejects_bad_containers(edit, match, data, tmp_path):
    X, y = data
    doc = json.loads(dumps(_fit("constant", X, y)))
    edit(doc)
    (tmp_path / "m.json").write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match=match):
        load_model(tmp_path / "m.json")


def test_invalid_json(tmp_path):
    (tmp_path / "m.json").write_text("{not json")
    with pytest.raises(ModelFormatError, match="invalid JSON"):
        load_model(tmp_path / "m.json")


def test_unsupported_type():
    with pytest.raises(TypeError):
        dumps(object())
