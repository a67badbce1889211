"""Alternating optimization of the kernel weights.

Each iteration solves the SVM on the current deep kernel, then moves every weight
along the gradient of the chosen objective and projects back onto theta >= 0:

* span: gradient descent on the smoothed span bound
* dual: gradient ascent on the SVM dual value at fixed alpha
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from loguru import logger

from .arch import ArchConfig, GramStack, forward, forward_cross, grad_theta
from .config import config
from .dataset import Dataset
from .errors import ConfigError, DeepMklError, TrainingError
from .span import SpanConfig, build_workspace, span_grad, t_span
from .svm import SvmModel, dual_grad_theta, predict, solve


class Objective(str, Enum):
    SPAN = "span"
    DUAL = "dual"


class TerminationReason(str, Enum):
    MAX_ITERS = "max_iters"
    STALLED = "stalled"
    FAILED = "failed"


@dataclass
class TrainOptions:
    objective: Objective = Objective.SPAN
    step_sizes: float | list[float] = field(default_factory=lambda: config.step_size)
    max_iters: int = field(default_factory=lambda: config.max_iters)
    C: float = field(default_factory=lambda: config.c_svm)
    span: SpanConfig = field(default_factory=SpanConfig)
    stop_tol: float = field(default_factory=lambda: config.stop_tol)
    stop_window: int = field(default_factory=lambda: config.stop_window)
    max_skips: int = field(default_factory=lambda: config.max_skips)
    # Labels the run in its report; fit itself draws no random numbers.
    seed: int = 0

    def __post_init__(self):
        self.objective = Objective(self.objective)
        steps = np.atleast_1d(np.asarray(self.step_sizes, dtype=float))
        if np.any(steps < 0) or np.any(steps > 1):
            raise ConfigError(f"step sizes must lie in [0, 1], got {self.step_sizes}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.C <= 0:
            raise ConfigError(f"C must be positive, got {self.C}")

    def step_vector(self, arch: ArchConfig) -> np.ndarray:
        """Step size of every flat weight, taken from the kernel the weight scales."""
        steps = np.atleast_1d(np.asarray(self.step_sizes, dtype=float))
        if steps.size == 1:
            return np.full(arch.n_weights, steps[0])
        if steps.size != arch.kernels:
            raise ConfigError(f"expected 1 or {arch.kernels} step sizes, got {steps.size}")
        return steps[arch.kernel_of_weights()]


@dataclass
class TrainReport:
    objective: Objective
    seed: int = 0
    trace: list[float] = field(default_factory=list)
    sv_counts: list[int] = field(default_factory=list)
    grad_norms: list[float] = field(default_factory=list)
    final_theta: np.ndarray | None = None
    best_iteration: int = -1
    termination: TerminationReason | None = None

    @property
    def iterations(self) -> int:
        return len(self.trace)

    @property
    def best_objective(self) -> float:
        return self.trace[self.best_iteration] if self.best_iteration >= 0 else math.nan

    def to_dict(self) -> dict:
        return {
            "objective": self.objective.value,
            "seed": self.seed,
            "iterations": self.iterations,
            "termination": self.termination.value if self.termination else None,
            "best_iteration": self.best_iteration,
            "best_objective": self.best_objective,
            "trace": self.trace,
            "sv_counts": self.sv_counts,
            "grad_norms": self.grad_norms,
            "final_theta": None if self.final_theta is None else self.final_theta.tolist(),
        }


def _is_better(value: float, best: float, objective: Objective) -> bool:
    if math.isnan(best):
        return True
    return value < best if objective == Objective.SPAN else value > best


def _stalled(trace: list[float], window: int, tol: float) -> bool:
    if len(trace) <= window:
        return False
    now, before = trace[-1], trace[-1 - window]
    if not (math.isfinite(now) and math.isfinite(before)):
        return False
    return abs(now - before) <= tol * max(abs(before), 1e-12)


def _objective_and_descent(
    arch: ArchConfig, stack: GramStack, model: SvmModel, opts: TrainOptions
) -> tuple[float, np.ndarray]:
    """Objective value and the direction the projected step subtracts."""
    d_kernels = grad_theta(arch, stack)
    if opts.objective == Objective.DUAL:
        ascent = np.array([dual_grad_theta(model, dK) for dK in d_kernels])
        return model.dual_value, -ascent

    ws = build_workspace(model, stack.final, opts.span)
    value = t_span(model, ws, opts.span)
    grads = np.array([span_grad(ws, dK, model, opts.span)[1] for dK in d_kernels])
    return value, grads


def fit(arch: ArchConfig, train: Dataset, opts: TrainOptions) -> tuple[ArchConfig, SvmModel, TrainReport]:
    """Train the kernel weights; returns the best iterate, not the last."""
    if len(np.unique(train.y)) < 2:
        raise ConfigError("training set must contain both classes")

    theta = arch.flat_theta()
    steps = opts.step_vector(arch)
    report = TrainReport(objective=opts.objective, seed=opts.seed)
    best_model: SvmModel | None = None
    best_value = math.nan
    alpha = None
    skips = 0

    logger.info(
        f"Fitting {arch.layers}-layer architecture ({arch.n_weights} weights) on {len(train)} points, "
        f"objective={opts.objective.value}, max_iters={opts.max_iters}"
    )

    def fail(message: str) -> TrainingError:
        report.termination = TerminationReason.FAILED
        if best_model is None:
            report.final_theta = arch.flat_theta()
        return TrainingError(f"iteration {report.iterations}: {message}", report)

    for iteration in range(opts.max_iters):
        current = arch.with_theta(theta)
        try:
            stack = forward(current, train.X)
            model = solve(stack.final, train.y, opts.C, alpha0=alpha)
            alpha = model.alpha

            if opts.objective == Objective.SPAN and model.n_sv < 2:
                skips += 1
                report.trace.append(math.nan)
                report.sv_counts.append(model.n_sv)
                report.grad_norms.append(math.nan)
                logger.warning(f"Iteration {iteration}: {model.n_sv} support vectors, skipping weight update")
                if skips >= opts.max_skips:
                    raise fail(f"{skips} consecutive iterations with fewer than 2 support vectors")
                continue
            skips = 0

            value, descent = _objective_and_descent(current, stack, model, opts)
        except DeepMklError as exc:
            if isinstance(exc, TrainingError):
                raise
            raise fail(str(exc)) from exc

        report.trace.append(value)
        report.sv_counts.append(model.n_sv)
        report.grad_norms.append(float(np.linalg.norm(descent)))
        logger.debug(
            f"Iteration {iteration}: objective {value:.6g}, {model.n_sv} SVs, |grad| {report.grad_norms[-1]:.3e}"
        )

        if _is_better(value, best_value, opts.objective):
            best_value = value
            best_model = model
            report.best_iteration = iteration
            report.final_theta = theta.copy()

        if _stalled(report.trace, opts.stop_window, opts.stop_tol):
            report.termination = TerminationReason.STALLED
            break
        theta = np.maximum(0.0, theta - steps * descent)
    else:
        report.termination = TerminationReason.MAX_ITERS

    if best_model is None:
        raise fail("no iteration produced a usable objective")

    logger.info(
        f"Finished after {report.iterations} iterations ({report.termination.value}); "
        f"best objective {best_value:.6g} at iteration {report.best_iteration}"
    )
    return arch.with_theta(report.final_theta), best_model, report


def evaluate(arch: ArchConfig, model: SvmModel, train: Dataset, test: Dataset) -> float:
    """Fraction of test points classified correctly through the trained stack."""
    if train.X.shape[1] != test.X.shape[1]:
        raise ValueError(f"dimension mismatch: train has {train.X.shape[1]} features, test has {test.X.shape[1]}")
    if len(model.alpha) != len(train):
        raise ValueError(f"model was trained on {len(model.alpha)} points, training set has {len(train)}")
    K_cross = forward_cross(arch, train.X, test.X)
    return float(np.mean(predict(model, K_cross) == test.y))
