from .arch import ArchConfig, GramStack, forward, forward_cross, grad_theta
from .bench import ExperimentConfig, ResultsTable, load_experiment, load_results, render_markdown, run, write_reports
from .bounds import BoundQuery, equivalent_ffn_width, pseudo_dim_bound, rademacher_bound
from .cli import main
from .config import Config, config
from .dataset import Dataset, RawDataset, SplitSpec, load_csv, prepare, split, standardize
from .errors import (
    ConfigError,
    DatasetError,
    DeepMklError,
    NumericFailure,
    SingularWorkspaceError,
    SvmConvergenceError,
    TrainingError,
)
from .kernels import KernelKind, KernelSpec, base_eval, base_gram, compose_deriv, compose_eval, default_roster
from .span import SpanConfig, SpanWorkspace, build_workspace, smoothed_span_sq, smoothed_spans, span_grad, t_span
from .stats import mean_ranks, p_values, wilcoxon_signed_rank
from .svm import SvmModel, decision_function, dual_grad_theta, dual_objective, predict, solve
from .train import Objective, TerminationReason, TrainOptions, TrainReport, evaluate, fit

__all__ = [
    "ArchConfig",
    "BoundQuery",
    "Config",
    "ConfigError",
    "Dataset",
    "DatasetError",
    "DeepMklError",
    "ExperimentConfig",
    "GramStack",
    "KernelKind",
    "KernelSpec",
    "NumericFailure",
    "Objective",
    "RawDataset",
    "ResultsTable",
    "SingularWorkspaceError",
    "SpanConfig",
    "SpanWorkspace",
    "SplitSpec",
    "SvmConvergenceError",
    "SvmModel",
    "TerminationReason",
    "TrainOptions",
    "TrainReport",
    "TrainingError",
    "base_eval",
    "base_gram",
    "build_workspace",
    "compose_deriv",
    "compose_eval",
    "config",
    "decision_function",
    "default_roster",
    "dual_grad_theta",
    "dual_objective",
    "equivalent_ffn_width",
    "evaluate",
    "fit",
    "forward",
    "forward_cross",
    "grad_theta",
    "load_csv",
    "load_experiment",
    "load_results",
    "main",
    "mean_ranks",
    "p_values",
    "predict",
    "prepare",
    "pseudo_dim_bound",
    "rademacher_bound",
    "render_markdown",
    "run",
    "smoothed_span_sq",
    "smoothed_spans",
    "solve",
    "span_grad",
    "split",
    "standardize",
    "t_span",
    "wilcoxon_signed_rank",
    "write_reports",
]
