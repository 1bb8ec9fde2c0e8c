"""Versioned JSON container for fitted estimators.

Every fitted attribute (names ending in ``_``) is stored together with the
constructor parameters, so a loaded model predicts exactly like the original.
Floats are written with ``repr`` precision and round-trip bit for bit.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator

from .baselines import (ConstantTimeBaseline, LinearTimeBaseline, LogisticBaseline,
                        OpenRateBaseline, SplitTaskModel)
from .boosting import CoxBoost, RegressionTree
from .cox import CoxPHElasticNet
from .cure import MixtureCureCox
from .nonparametric import StepSurvivalCurve

FORMAT = "timetoopen-model"
FORMAT_VERSION = 1

MODEL_TYPES = {cls.__name__: cls for cls in (
    CoxPHElasticNet, CoxBoost, MixtureCureCox, OpenRateBaseline, ConstantTimeBaseline,
    LogisticBaseline, LinearTimeBaseline, SplitTaskModel,
)}


class ModelFormatError(ValueError):
    """Raised for containers that are not valid model files."""


def _encode(value):
    if isinstance(value, BaseEstimator):
        return {"__estimator__": to_dict(value)}
    if isinstance(value, StepSurvivalCurve):
        return {"__curve__": {"times": _encode(value.times),
                              "survival": _encode(value.survival),
                              "cum_hazard": _encode(value.cum_hazard)}}
    if isinstance(value, RegressionTree):
        return {"__tree__": value.to_dict()}
    if isinstance(value, np.ndarray):
        if value.dtype.kind not in "biuf":
            raise TypeError(f"cannot store array of dtype {value.dtype}")
        return {"__ndarray__": value.tolist(), "dtype": value.dtype.str,
                "shape": list(value.shape)}
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, (list, tuple)):
        return [_encode(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _encode(v) for k, v in value.items()}
    if value is None or isinstance(value, (bool, int, float, str)):
        return value
    raise TypeError(f"cannot store value of type {type(value).__name__}")


def _decode(value):
    if isinstance(value, list):
        return [_decode(v) for v in value]
    if not isinstance(value, dict):
        return value
    if "__estimator__" in value:
        return from_dict(value["__estimator__"])
    if "__curve__" in value:
        c = value["__curve__"]
        return StepSurvivalCurve(_decode(c["times"]), _decode(c["survival"]),
                                 _decode(c["cum_hazard"]))
    if "__tree__" in value:
        return RegressionTree.from_dict(value["__tree__"])
    if "__ndarray__" in value:
        arr = np.asarray(value["__ndarray__"], dtype=np.dtype(value["dtype"]))
        return arr.reshape(value["shape"])
    return {k: _decode(v) for k, v in value.items()}


def to_dict(model, provenance=None) -> dict:
    """Container for a fitted (or unfitted) estimator."""
    name = type(model).__name__
    if name not in MODEL_TYPES:
        raise TypeError(f"unsupported model type {name}")
    state = {k: v for k, v in vars(model).items() if k.endswith("_") and not k.startswith("_")}
    from . import __version__

    out = {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "package_version": __version__,
        "model_type": name,
        "params": _encode(model.get_params(deep=False)),
        "state": _encode(state),
    }
    if provenance is not None:
        out["provenance"] = _encode(provenance)
    return out


def from_dict(data: dict):
    if not isinstance(data, dict) or data.get("format") != FORMAT:
        raise ModelFormatError("not a timetoopen model container")
    if data.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {data.get('format_version')!r}")
    try:
        cls = MODEL_TYPES[data["model_type"]]
    except KeyError:
        raise ModelFormatError(f"unknown model type {data.get('model_type')!r}") from None
    model = cls(**_decode(data["params"]))
    for key, value in _decode(data["state"]).items():
        setattr(model, key, value)
    return model


def dumps(model, provenance=None) -> str:
    return json.dumps(to_dict(model, provenance), indent=1, sort_keys=True) + "\n"


def save_model(model, path, provenance=None) -> None:
    """Write ``model`` as JSON; ``provenance`` (config, seed, ...) is stored alongside."""
    Path(path).write_text(dumps(model, provenance), encoding="utf-8")


def load_model(path):
    """Read a model written by :func:`save_model`."""
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON ({exc})") from None
    return from_dict(data)


def load_provenance(path) -> dict | None:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    prov = data.get("provenance")
    return None if prov is None else _decode(prov)
