"""Command-line front end: ``timetoopen <command> [options]``.

Every command writes its artifacts to ``--out`` and prints one JSON summary
line on stdout. JSON artifacts embed the parsed run configuration; CSV
artifacts are listed with their SHA-256 digests in ``manifest.json``.

Exit codes: 0 success, 1 a model failed to fit, 2 bad usage or input.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .cox import CoxPHElasticNet, schoenfeld_residuals
from .data import RawEventLog, SchemaError, SurvivalDataset, apply_censoring, load_csv, save_csv
from .evaluation import (DEFAULT_WINDOWS, MODEL_NAMES, N_JOBS_ENV, OPEN_RATE_FEATURE,
                         EvaluationReport, bootstrap_stability, evaluate, evaluate_out_of_time,
                         grid_search, lambda_max, make_model, prediction_table, score_model)
from .metrics import DEFAULT_PERCENTILES
from .nonparametric import kaplan_meier, log_rank_test
from .serialization import ModelFormatError, load_model, load_provenance, save_model
from .simulate import GeneratorConfig, SplitScheme, generate, split_chronological

logger = logging.getLogger("timetoopen")

CLI_MODELS = {name.lower(): name for name in MODEL_NAMES}
SEARCHABLE = ("lr", "cph-l", "cph-g")
DEFAULT_FRACTIONS = (0.0, 1e-3, 1e-2, 1e-1)
DEFAULT_L1_RATIOS = (0.5, 1.0)
DEFAULT_BOOST_GRID = {"n_estimators": [100, 300], "learning_rate": [0.05, 0.2],
                      "min_samples_leaf": [50, 500]}

EXIT_OK, EXIT_FIT_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad arguments or inputs; reported with exit code 2."""


class FitFailed(Exception):
    """A model could not be fitted; reported with exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- artifacts

class Run:
    """Collects the artifacts of one command and writes the manifest."""

    def __init__(self, args):
        self.command = args.command
        self.config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.artifacts: dict[str, str] = {}
        self.inputs = {}
        for key in ("train", "validate", "test", "data", "model_file", "selection"):
            paths = self.config.get(key)
            for path in ([paths] if isinstance(paths, str) else paths or []):
                self.inputs[path] = _sha256(Path(path))
        for path in self.config.get("params") or []:
            if not path.lstrip().startswith("{"):
                self.inputs[path] = _sha256(Path(path))

    @property
    def record(self) -> dict:
        return {
            "command": self.command,
            "config": self.config,
            "seed": self.config.get("seed"),
            "package_version": __version__,
            "inputs": self.inputs,
        }

    def path(self, name) -> Path:
        return self.out / name

    def add(self, name):
        self.artifacts[name] = _sha256(self.path(name))

    def write_json(self, name, payload):
        body = dict(payload)
        body["run"] = self.record
        self.path(name).write_text(_dumps(body, indent=2), encoding="utf-8")
        self.add(name)

    def finish(self, summary: dict) -> dict:
        manifest = dict(self.record)
        manifest["artifacts"] = dict(sorted(self.artifacts.items()))
        self.path("manifest.json").write_text(_dumps(manifest, indent=2), encoding="utf-8")
        out = {"command": self.command, "status": "ok", "out": str(self.out),
               "artifacts": sorted(self.artifacts) + ["manifest.json"]}
        out.update(summary)
        return out


def _sha256(path: Path) -> str:
    try:
        return hashlib.sha256(path.read_bytes()).hexdigest()
    except FileNotFoundError:
        raise UsageError(f"file not found: {path}") from None


def _default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _dumps(obj, indent=None) -> str:
    text = json.dumps(obj, indent=indent, sort_keys=True, default=_default)
    return text + "\n" if indent is not None else text


def _write_table(path: Path, table: dict):
    columns = list(table)
    n = len(next(iter(table.values())))
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for i in range(n):
            writer.writerow([_cell(table[c][i]) for c in columns])


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value.item() if isinstance(value, np.generic) else value)


# ------------------------------------------------------------------- inputs

def _load(path) -> RawEventLog | SurvivalDataset:
    if not Path(path).is_file():
        raise UsageError(f"file not found: {path}")
    return load_csv(path)


def _load_log(path) -> RawEventLog:
    obj = _load(path)
    if not isinstance(obj, RawEventLog):
        raise UsageError(f"{path}: a raw event log is needed (labels depend on the window)")
    return obj


def _load_dataset(path, window) -> SurvivalDataset:
    obj = _load(path)
    if isinstance(obj, RawEventLog):
        if window is None:
            raise UsageError(f"{path} is a raw event log; pass --window")
        return apply_censoring(obj, window)
    if window is not None and obj.censoring_window != float(window):
        raise UsageError(f"{path} was censored at {obj.censoring_window:g} min, "
                         f"not at --window {window:g}")
    return obj


def _parse_params(specs) -> dict:
    """Merge ``--params`` values into ``{model: params}``.

    Each value is inline JSON or a file; either may hold plain parameters
    (applied to every model), a ``{MODEL: params}`` mapping, or a search
    artifact with ``model`` and ``best_params``.
    """
    merged = {"*": {}}
    for spec in specs or []:
        text = spec if spec.lstrip().startswith("{") else _read_text(spec)
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"--params {spec}: invalid JSON ({exc})") from None
        if not isinstance(data, dict):
            raise UsageError(f"--params {spec}: expected a JSON object")
        if "best_params" in data and "model" in data:
            merged.setdefault(data["model"], {}).update(data["best_params"])
        elif data and set(data) <= set(MODEL_NAMES):
            for name, params in data.items():
                merged.setdefault(name, {}).update(params)
        else:
            merged["*"].update(data)
    return merged


def _params_for(merged, name) -> dict:
    return {**merged["*"], **merged.get(name, {})}


def _read_text(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise UsageError(f"file not found: {path}") from None


def _build(name, params, feature_names):
    try:
        return make_model(name, params, feature_names)
    except TypeError as exc:
        raise UsageError(f"bad parameters for {name}: {exc}") from None


def _model_names(values) -> list[str]:
    return [CLI_MODELS[v] for v in values]


# ----------------------------------------------------------------- commands

def cmd_generate(args, run: Run) -> dict:
    overrides = json.loads(_read_text(args.config)) if args.config else {}
    for key, value in (("n_recipients", args.n_recipients),
                       ("n_emails_per_recipient", args.emails_per_recipient),
                       ("n_weeks", args.weeks)):
        if value is not None:
            overrides[key] = value
    overrides["seed"] = args.seed
    overrides = {k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()}
    try:
        config = GeneratorConfig(**overrides)
        scheme = SplitScheme(args.train_weeks, args.validate_weeks, args.gap_weeks,
                             args.test_weeks)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid generator configuration: {exc}") from None
    log, truth = generate(config)
    save_csv(log, run.path("events.csv"))
    run.add("events.csv")
    truth.to_csv(run.path("truth.csv"))
    run.add("truth.csv")
    parts = split_chronological(log, scheme)
    for name, part in zip(("train", "validate", "test"), parts):
        save_csv(part, run.path(f"{name}.csv"))
        run.add(f"{name}.csv")
    opened = np.isfinite(log.open_ts)
    run.write_json("generator.json", {"generator": config.to_dict(),
                                      "split": vars(scheme)})
    return {"rows": len(log), "opened_fraction": float(opened.mean()),
            "split_rows": [len(p) for p in parts]}


def cmd_fit(args, run: Run) -> dict:
    name = CLI_MODELS[args.model]
    ds = _load_dataset(args.train, args.window)
    params = _params_for(_parse_params(args.params), name)
    model = _build(name, params, ds.feature_names)
    try:
        model.fit(ds.X, ds.y)
    except Exception as exc:
        raise FitFailed(f"{name}: {type(exc).__name__}: {exc}") from exc
    provenance = dict(run.record)
    provenance.update(model_name=name, feature_names=list(ds.feature_names),
                      censoring_window=ds.censoring_window)
    save_model(model, run.path("model.json"), provenance=provenance)
    run.add("model.json")
    return {"model": name, "params": params, "n_rows": len(ds), "n_events": ds.n_events,
            "window": ds.censoring_window}


def cmd_diagnose(args, run: Run) -> dict:
    ds = _load_dataset(args.data, args.window)
    if args.group_feature not in ds.feature_names:
        raise UsageError(f"unknown --group-feature {args.group_feature!r}")
    try:
        model = CoxPHElasticNet().fit(ds.X, ds.y)
    except Exception as exc:
        raise FitFailed(f"CPH-L: {type(exc).__name__}: {exc}") from exc
    report = schoenfeld_residuals(ds, model, alpha=args.alpha)
    report.to_csv(run.path("schoenfeld.csv"))
    run.add("schoenfeld.csv")

    value = ds.column(args.group_feature)
    engaged = value > args.group_threshold
    groups = {"engaged": ds.take(np.flatnonzero(engaged)),
              "not_engaged": ds.take(np.flatnonzero(~engaged))}
    kaplan_meier(ds).to_csv(run.path("km_all.csv"))
    run.add("km_all.csv")
    for label, part in groups.items():
        if len(part):
            kaplan_meier(part).to_csv(run.path(f"km_{label}.csv"))
            run.add(f"km_{label}.csv")
    try:
        statistic, p_value = log_rank_test(groups["engaged"], groups["not_engaged"])
    except ValueError as exc:
        raise UsageError(f"log-rank test not possible: {exc}") from None
    proportional = {
        "alpha": args.alpha,
        "coef": dict(zip(ds.feature_names, model.coef_.tolist())),
        "p_values": dict(zip(ds.feature_names, report.p_values.tolist())),
        "feature_passed": report.feature_passed(),
        "passed": report.passed,
        "residual_sums": dict(zip(ds.feature_names, report.residuals.sum(axis=0).tolist())),
    }
    logrank = {"statistic": statistic, "p_value": p_value,
               "group_feature": args.group_feature, "threshold": args.group_threshold,
               "sizes": {k: len(v) for k, v in groups.items()},
               "events": {k: v.n_events for k, v in groups.items()}}
    run.write_json("diagnostics.json", {"proportional_hazards": proportional,
                                        "log_rank": logrank})
    return {"proportional_hazards_passed": report.passed, "log_rank_p_value": p_value}


def cmd_predict(args, run: Run) -> dict:
    try:
        model = load_model(args.model_file)
    except ModelFormatError as exc:
        raise UsageError(str(exc)) from None
    window = args.window if args.window is not None else model.censoring_window_
    ds = _load_dataset(args.data, window)
    table = prediction_table(model, ds, args.percentiles)
    _write_table(run.path("predictions.csv"), table)
    run.add("predictions.csv")
    return {"n_rows": len(ds), "window": ds.censoring_window,
            "percentiles": list(args.percentiles)}


def _report_artifacts(run: Run, report: EvaluationReport, stem: str):
    report.to_csv(run.path(f"{stem}.csv"))
    run.add(f"{stem}.csv")
    run.write_json(f"{stem}.json", report.to_dict())


def _evaluate_fitted(args, run: Run) -> EvaluationReport:
    report = EvaluationReport(metadata={"percentiles": list(args.percentiles)})
    for path in args.model_file:
        try:
            model = load_model(path)
        except ModelFormatError as exc:
            raise UsageError(f"{path}: {exc}") from None
        name = _model_label(path)
        window = model.censoring_window_
        ds = _load_dataset(args.validate, window)
        for row in score_model(model, ds, args.percentiles):
            row.update(model=name, window=float(window))
            report.rows.append(row)
    return report


def _model_label(path) -> str:
    prov = load_provenance(path) or {}
    return prov.get("model_name", Path(path).stem)


def cmd_evaluate(args, run: Run) -> dict:
    if args.model_file:
        if args.final:
            raise UsageError("--final refits models; it cannot be combined with --model-file")
        report = _evaluate_fitted(args, run)
        _report_artifacts(run, report, "report")
        return {"rows": len(report.rows)}
    if args.train is None:
        raise UsageError("evaluate needs --train (or --model-file)")
    train, validate = _load_log(args.train), _load_log(args.validate)
    merged = _parse_params(args.params)
    names = _model_names(args.models)
    models = {n: _build(n, _params_for(merged, n), train.feature_names) for n in names}
    if args.final:
        if args.test is None:
            raise UsageError("--final needs --test")
        test = _load_log(args.test)
        if args.selection:
            selection = _load_selection(args.selection)
        else:
            selection = evaluate(models, train, validate, args.windows, args.percentiles)
            _report_artifacts(run, selection, "report")
        chosen = {}
        for name in names:
            for window in args.windows:
                try:
                    chosen[(name, float(window))] = selection.best_percentile(name, window)
                except ValueError:
                    pass
        report = evaluate_out_of_time(models, train, validate, test, args.windows, chosen)
        report.metadata["selected_percentiles"] = [
            {"model": m, "window": w, "percentile": p} for (m, w), p in sorted(chosen.items())]
        report.failures.update({f"validate:{k}": v for k, v in selection.failures.items()})
        _report_artifacts(run, report, "report_final")
    else:
        report = evaluate(models, train, validate, args.windows, args.percentiles)
        _report_artifacts(run, report, "report")
    if report.failures:
        raise FitFailed(f"model fits failed: {report.failures}")
    return {"rows": len(report.rows), "models": names,
            "windows": [float(w) for w in args.windows]}


def _load_selection(path) -> EvaluationReport:
    data = json.loads(_read_text(path))
    try:
        return EvaluationReport(rows=data["rows"], failures=data.get("failures", {}))
    except (KeyError, TypeError):
        raise UsageError(f"{path}: not an evaluation report") from None


def cmd_bootstrap(args, run: Run) -> dict:
    train = _load_dataset(args.train, args.window)
    validate = _load_dataset(args.validate, args.window)
    merged = _parse_params(args.params)
    results, rows = {}, []
    for name in _model_names(args.models):
        est = _build(name, _params_for(merged, name), train.feature_names)
        try:
            res = bootstrap_stability(est, train, validate, n=args.n, seed=args.seed,
                                      percentile=args.percentile)
        except Exception as exc:
            raise FitFailed(f"{name}: {type(exc).__name__}: {exc}") from exc
        auc_mean, auc_std = res["auc"]
        mrad_mean, mrad_std = res["mrad_o"]
        results[name] = {
            "auc_mean": auc_mean, "auc_std": auc_std,
            "mrad_o_mean": mrad_mean, "mrad_o_std": mrad_std,
            "auc_relative_std": auc_std / auc_mean,
            "mrad_o_relative_std": mrad_std / mrad_mean,
            "samples": res["samples"],
        }
        for i, s in enumerate(res["samples"]):
            rows.append((name, i, s["auc"], s["mrad_o"]))
    with run.path("bootstrap.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["model", "sample", "auc", "mrad_o"])
        for name, i, a, m in rows:
            writer.writerow([name, i, repr(a), repr(m)])
    run.add("bootstrap.csv")
    run.write_json("bootstrap.json", {"window": train.censoring_window,
                                      "percentile": args.percentile, "n": args.n,
                                      "models": results})
    return {name: {k: v for k, v in r.items() if k != "samples"} for name, r in results.items()}


def search_grid(name, train: SurvivalDataset, fractions=DEFAULT_FRACTIONS,
                l1_ratios=DEFAULT_L1_RATIOS, grid=None) -> list[dict]:
    """Grid points for ``name``; penalties are fractions of ``lambda_max``."""
    if grid is not None:
        return grid
    if name == "CPH-G":
        return DEFAULT_BOOST_GRID
    points, seen = [], set()
    for fraction in fractions:
        for ratio in l1_ratios:
            key = (fraction, ratio if fraction > 0 else None)
            if key in seen:
                continue
            seen.add(key)
            lam = fraction * lambda_max(name, train, ratio)
            points.append({"penalty": lam, "l1_ratio": ratio if fraction > 0 else 0.0})
    return points


def cmd_search(args, run: Run) -> dict:
    name = CLI_MODELS[args.model]
    train = _load_dataset(args.train, args.window)
    validate = _load_dataset(args.validate, args.window)
    grid = json.loads(_read_text(args.grid)) if args.grid else None
    points = search_grid(name, train, args.fractions, args.l1_ratios, grid)
    _build(name, {}, train.feature_names)

    def factory(params):
        return make_model(name, params, train.feature_names)

    try:
        best, results = grid_search(factory, points, train, validate, percentile=args.percentile)
    except RuntimeError as exc:
        raise FitFailed(f"{name}: {exc}") from exc
    best_auc = next(r["auc"] for r in results if r["params"] == best)
    payload = {"model": name, "window": train.censoring_window, "percentile": args.percentile,
               "best_params": best, "best_auc": best_auc, "results": results}
    if name in ("CPH-L", "LR"):
        payload["lambda_max"] = {str(r): lambda_max(name, train, r) for r in args.l1_ratios}
    run.write_json(f"search_{args.model}.json", payload)
    return {"model": name, "best_params": best, "best_auc": best_auc}


# ------------------------------------------------------------------- parser

def _add_out(p):
    p.add_argument("--out", required=True, help="directory for the artifacts")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="timetoopen", description=__doc__.splitlines()[0],
                     epilog=f"Set {N_JOBS_ENV} to run model fits in parallel.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    models = sorted(CLI_MODELS)

    p = sub.add_parser("generate", help="simulate an event log and split it")
    _add_out(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-recipients", type=int)
    p.add_argument("--emails-per-recipient", type=int)
    p.add_argument("--weeks", type=int)
    p.add_argument("--config", help="JSON file of generator settings")
    p.add_argument("--train-weeks", type=float, default=4)
    p.add_argument("--validate-weeks", type=float, default=3)
    p.add_argument("--gap-weeks", type=float, default=3)
    p.add_argument("--test-weeks", type=float, default=3)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("fit", help="fit one model and save it")
    _add_out(p)
    p.add_argument("--train", required=True)
    p.add_argument("--model", required=True, choices=models)
    p.add_argument("--window", type=float, help="censoring window in minutes")
    p.add_argument("--params", action="append", help="JSON object or file")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("diagnose", help="proportional-hazards and log-rank checks")
    _add_out(p)
    p.add_argument("--data", required=True)
    p.add_argument("--window", type=float)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--group-feature", default=OPEN_RATE_FEATURE)
    p.add_argument("--group-threshold", type=float, default=0.0)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("predict", help="per-row predictions from a saved model")
    _add_out(p)
    p.add_argument("--model-file", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--window", type=float)
    p.add_argument("--percentiles", type=float, nargs="+", default=list(DEFAULT_PERCENTILES))
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="compare models across windows and percentiles")
    _add_out(p)
    p.add_argument("--train")
    p.add_argument("--validate", required=True)
    p.add_argument("--test")
    p.add_argument("--models", nargs="+", choices=models, default=[m.lower() for m in MODEL_NAMES])
    p.add_argument("--model-file", nargs="+", help="score saved models instead of fitting")
    p.add_argument("--windows", type=float, nargs="+", default=list(DEFAULT_WINDOWS))
    p.add_argument("--percentiles", type=float, nargs="+", default=list(DEFAULT_PERCENTILES))
    p.add_argument("--params", action="append", help="JSON object or file (repeatable)")
    p.add_argument("--final", action="store_true",
                   help="refit on train+validate and score --test")
    p.add_argument("--selection", help="validation report used to pick percentiles")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("bootstrap", help="metric stability under training resamples")
    _add_out(p)
    p.add_argument("--train", required=True)
    p.add_argument("--validate", required=True)
    p.add_argument("--models", nargs="+", choices=models, default=["mm", "cph-l"])
    p.add_argument("--window", type=float, default=DEFAULT_WINDOWS[-1])
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--percentile", type=float, default=5)
    p.add_argument("--params", action="append", help="JSON object or file (repeatable)")
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("search", help="hyper-parameter grid search on validation AUC")
    _add_out(p)
    p.add_argument("--train", required=True)
    p.add_argument("--validate", required=True)
    p.add_argument("--model", required=True, choices=SEARCHABLE)
    p.add_argument("--window", type=float, default=DEFAULT_WINDOWS[-1])
    p.add_argument("--percentile", type=float, default=5)
    p.add_argument("--fractions", type=float, nargs="+", default=list(DEFAULT_FRACTIONS),
                   help="penalties as fractions of lambda_max")
    p.add_argument("--l1-ratios", type=float, nargs="+", default=list(DEFAULT_L1_RATIOS))
    p.add_argument("--grid", help="JSON file: {name: values} or a list of parameter dicts")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("replay", help="re-run the command recorded in an artifact")
    p.add_argument("artifact")
    p.add_argument("--out", help="override the recorded output directory")
    p.set_defaults(func=None)
    return parser


def _replay_args(parser, artifact, out):
    data = json.loads(_read_text(artifact))
    record = data.get("run", data.get("provenance", data))
    config = record.get("config") if isinstance(record, dict) else None
    if not config or "command" not in record:
        raise UsageError(f"{artifact}: no embedded run configuration")
    sub = parser._subparsers._group_actions[0].choices[record["command"]]
    args = argparse.Namespace(**config)
    args.func = sub.get_default("func")
    if out is not None:
        args.out = out
    return args


def main(argv=None) -> int:
    parser = build_parser()
    command = None
    try:
        args = parser.parse_args(argv)
        command = args.command
        logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                            stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
        if args.command == "replay":
            args = _replay_args(parser, args.artifact, args.out)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            logging.captureWarnings(True)
            run = Run(args)
            summary = run.finish(args.func(args, run))
    except UsageError as exc:
        return _fail(command, "usage", str(exc), EXIT_USAGE)
    except (SchemaError, ModelFormatError) as exc:
        return _fail(command, type(exc).__name__, str(exc), EXIT_USAGE)
    except FitFailed as exc:
        return _fail(command, "fit_failed", str(exc), EXIT_FIT_FAILED)
    finally:
        logging.captureWarnings(False)
    print(_dumps(summary))
    return EXIT_OK


def _fail(command, kind, message, code) -> int:
    print(_dumps({"command": command, "status": "error",
                  "error": {"type": kind, "message": message}, "exit_code": code}))
    print(f"timetoopen: error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
