"""Time-to-open prediction for email campaigns with survival models."""

__version__ = "0.1.0"

from .baselines import (ConstantTimeBaseline, LinearTimeBaseline, LogisticBaseline,
                        OpenRateBaseline, SplitTaskModel, predict_baseline)
from .boosting import CoxBoost, RegressionTree
from .cox import (ConvergenceError, CoxPartialLikelihood, CoxPHElasticNet,
                  ProportionalityReport, partial_ll_gradient, partial_log_likelihood,
                  schoenfeld_residuals)
from .cure import MixtureCureCox, mixture_survivor
from .data import (RawEventLog, SchemaError, SurvivalDataset, SurvivalRecord, apply_censoring,
                   load_csv, make_survival_array, risk_set_sizes, save_csv)
from .evaluation import (EvaluationReport, bootstrap_stability, evaluate, evaluate_out_of_time,
                         grid_search, individual_survivor, make_model)
from .metrics import auc, mrad, predict_time_percentile
from .nonparametric import StepSurvivalCurve, breslow_baseline, kaplan_meier, log_rank_test
from .serialization import load_model, save_model
from .simulate import GeneratorConfig, SplitScheme, generate, split_chronological

__all__ = [
    "ConstantTimeBaseline", "ConvergenceError", "CoxBoost", "CoxPartialLikelihood",
    "CoxPHElasticNet", "EvaluationReport", "GeneratorConfig", "LinearTimeBaseline",
    "LogisticBaseline", "MixtureCureCox", "OpenRateBaseline", "ProportionalityReport",
    "RawEventLog", "RegressionTree", "SchemaError", "SplitScheme", "SplitTaskModel",
    "StepSurvivalCurve", "SurvivalDataset", "SurvivalRecord", "apply_censoring", "auc",
    "bootstrap_stability", "breslow_baseline", "evaluate", "evaluate_out_of_time", "generate",
    "grid_search", "individual_survivor", "kaplan_meier", "load_csv", "load_model",
    "log_rank_test", "make_model", "make_survival_array", "mixture_survivor", "mrad",
    "partial_ll_gradient", "partial_log_likelihood", "predict_baseline",
    "predict_time_percentile", "risk_set_sizes", "save_csv", "save_model",
    "schoenfeld_residuals", "split_chronological",
]
