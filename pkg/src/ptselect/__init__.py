"""Personalized treatment selection from multivariate trial outcomes.

Fits one semiparametric single-index model per (response, arm) pair, with
inverse-probability-of-censoring reweighting for right-censored responses,
summarizes patients by per-response composite scores, kernel-smooths
conditional mean outcomes given the score, and rank-aggregates the arms
across responses with a weighted footrule distance to recommend a
treatment. Ships a simulation harness, a dataset/CLI layer, and an HTTP
service for interactive weight exploration.
"""

from .condmeans import MeanSurface, build_surface, eval_mu
from .data import ResponseSpec, TrialDataset, load_dataset, save_dataset
from .engine import EngineConfig, FittedEngine, Recommendation, fit_engine, recommend, recommend_batch
from .rankagg import AggregationProblem, RankedList, aggregate_ce, aggregate_exact, footrule, ranks_from_values
from .scoring import PatientScore, ScorePanel, score_margins, score_patient
from .simulation import AccuracyReport, CensoringSpec, ScenarioConfig, censoring_preset, generate_replicate, run_scenario, truth_label
from .singleindex import SimFit, fit_sim_complete, fit_sim_ipcw, predict_link
from .smoothing import Kernel, gaussian_kernel, nw_smooth, plugin_bandwidth
from .survival import CensoringModel, SurvivalRecord, WeightTable, fit_aalen_censoring, ipcw_weights, kaplan_meier

__version__ = "0.1.0"

__all__ = [
    "AccuracyReport",
    "AggregationProblem",
    "CensoringModel",
    "CensoringSpec",
    "EngineConfig",
    "FittedEngine",
    "Kernel",
    "MeanSurface",
    "PatientScore",
    "RankedList",
    "Recommendation",
    "ResponseSpec",
    "ScenarioConfig",
    "ScorePanel",
    "SimFit",
    "SurvivalRecord",
    "TrialDataset",
    "WeightTable",
    "aggregate_ce",
    "aggregate_exact",
    "build_surface",
    "censoring_preset",
    "eval_mu",
    "fit_aalen_censoring",
    "fit_engine",
    "fit_sim_complete",
    "fit_sim_ipcw",
    "footrule",
    "gaussian_kernel",
    "generate_replicate",
    "ipcw_weights",
    "kaplan_meier",
    "load_dataset",
    "nw_smooth",
    "plugin_bandwidth",
    "predict_link",
    "ranks_from_values",
    "recommend",
    "recommend_batch",
    "run_scenario",
    "save_dataset",
    "score_margins",
    "score_patient",
    "truth_label",
]
