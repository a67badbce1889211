"""Benchmark grid: datasets x methods x seeds, with ranks and Wilcoxon p-values."""

import asyncio
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .arch import ArchConfig
from .config import config
from .dataset import prepare
from .errors import ConfigError, DeepMklError
from .kernels import KernelSpec, default_roster
from .span import SpanConfig
from .stats import TieMethod, mean_ranks, p_values
from .train import Objective, TrainOptions, evaluate, fit


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class DatasetEntry(_Strict):
    name: str
    path: Path
    label_column: str


class MethodEntry(_Strict):
    objective: Objective
    layers: int = Field(ge=1)

    @property
    def name(self) -> str:
        return f"{self.objective.value}-{self.layers}"


class ArchitectureSection(_Strict):
    sets: int = Field(default=1, ge=1)
    kernels: list[KernelSpec] = Field(default_factory=default_roster, min_length=1)
    theta_init: Literal["uniform"] = "uniform"


class TrainOverrides(_Strict):
    step_sizes: float | list[float] | None = None
    max_iters: int | None = Field(default=None, ge=1)
    C: float | None = Field(default=None, gt=0)
    eta: float | None = Field(default=None, gt=0)
    span_c: float | None = Field(default=None, gt=0)
    span_d: float | None = None
    stop_tol: float | None = Field(default=None, ge=0)
    include_alpha_term: bool = True

    def options(self, objective: Objective, seed: int) -> TrainOptions:
        span = SpanConfig(
            c=config.span_c if self.span_c is None else self.span_c,
            d_offset=config.span_d if self.span_d is None else self.span_d,
            eta=config.eta if self.eta is None else self.eta,
            include_alpha_term=self.include_alpha_term,
        )
        given = {"step_sizes": self.step_sizes, "max_iters": self.max_iters, "C": self.C, "stop_tol": self.stop_tol}
        return TrainOptions(
            objective=objective,
            span=span,
            seed=seed,
            **{key: value for key, value in given.items() if value is not None},
        )


class OutputSection(_Strict):
    json_path: Path = Path("results.json")
    markdown_path: Path = Path("results.md")


class ExperimentConfig(_Strict):
    datasets: list[DatasetEntry] = Field(min_length=1)
    methods: list[MethodEntry] = Field(min_length=1)
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    train_fraction: float = Field(default_factory=lambda: config.train_fraction, gt=0, lt=1)
    architecture: ArchitectureSection = Field(default_factory=ArchitectureSection)
    train: TrainOverrides = Field(default_factory=TrainOverrides)
    output: OutputSection = Field(default_factory=OutputSection)
    reference: str | None = None
    ties: TieMethod = "average"
    workers: int = Field(default_factory=lambda: config.workers, ge=1)

    def method_labels(self) -> list[str]:
        """Method names, suffixed when the same method appears more than once."""
        labels: list[str] = []
        for method in self.methods:
            label, copy = method.name, 2
            while label in labels:
                label = f"{method.name} ({copy})"
                copy += 1
            labels.append(label)
        return labels


def load_experiment(path: str | Path) -> ExperimentConfig:
    """Parse an experiment file; relative paths resolve against the file's directory."""
    path = Path(path)
    try:
        experiment = ExperimentConfig.model_validate_json(path.read_text(encoding="utf-8"))
    except (OSError, ValidationError) as exc:
        raise ConfigError(f"invalid experiment config {path}: {exc}") from exc

    root = path.resolve().parent
    for entry in experiment.datasets:
        if not entry.path.is_absolute():
            entry.path = root / entry.path
    output = experiment.output
    for field_name in ("json_path", "markdown_path"):
        value = getattr(output, field_name)
        if not value.is_absolute():
            setattr(output, field_name, root / value)
    return experiment


class CellFailure(BaseModel):
    dataset: str
    method: str
    seed: int
    reason: str


class ResultsTable(BaseModel):
    datasets: list[str]
    methods: list[str]
    seeds: list[int]
    accuracy: dict[str, dict[str, dict[int, float | None]]]
    failures: list[CellFailure] = Field(default_factory=list)
    ties: TieMethod = "average"
    reference: str | None = None
    mean_ranks: dict[str, float] = Field(default_factory=dict)
    p_values: dict[str, float | None] = Field(default_factory=dict)

    @classmethod
    def from_grid(cls, datasets: list[str], methods: list[str], grid: np.ndarray, seed: int = 0) -> "ResultsTable":
        """Single-seed table from a datasets x methods accuracy matrix in [0, 1]."""
        accuracy = {
            name: {method: {seed: float(grid[i, j])} for j, method in enumerate(methods)}
            for i, name in enumerate(datasets)
        }
        return cls(datasets=datasets, methods=methods, seeds=[seed], accuracy=accuracy)

    def seed_means(self) -> np.ndarray:
        """datasets x methods matrix of seed-mean accuracy; NaN where every seed is missing."""
        grid = np.full((len(self.datasets), len(self.methods)), np.nan)
        for i, name in enumerate(self.datasets):
            for j, method in enumerate(self.methods):
                values = [v for v in self.accuracy[name][method].values() if v is not None]
                if values:
                    grid[i, j] = float(np.mean(values))
        return grid

    def aggregate(self, reference: str | None = None, ties: TieMethod | None = None) -> "ResultsTable":
        """Fill mean ranks and p-values from datasets with no missing method cell."""
        reference = reference or self.reference or self.methods[-1]
        if reference not in self.methods:
            raise ConfigError(f"reference method {reference!r} is not one of {self.methods}")
        ties = ties or self.ties

        grid = self.seed_means()
        complete = ~np.isnan(grid).any(axis=1)
        for name in np.array(self.datasets)[~complete]:
            logger.warning(f"Excluding {name} from ranks and p-values: missing cells")
        grid = grid[complete]

        ranks: dict[str, float] = {}
        pvals: dict[str, float | None] = {}
        if len(grid):
            ranks = dict(zip(self.methods, map(float, mean_ranks(grid, ties=ties)), strict=True))
        if len(grid) >= 2:
            pvals = dict(zip(self.methods, p_values(grid, self.methods.index(reference)), strict=True))
        return self.model_copy(update={"reference": reference, "ties": ties, "mean_ranks": ranks, "p_values": pvals})


def render_markdown(table: ResultsTable) -> str:
    """Percent accuracies (seed means, 2 decimals) with Rank and p-value rows."""
    grid = table.seed_means()
    lines = [
        "| Dataset | " + " | ".join(table.methods) + " |",
        "|---|" + "---:|" * len(table.methods),
    ]
    for i, name in enumerate(table.datasets):
        cells = ["n/a" if np.isnan(v) else f"{100 * v:.2f}" for v in grid[i]]
        lines.append(f"| {name} | " + " | ".join(cells) + " |")
    if table.mean_ranks:
        lines.append("| Rank | " + " | ".join(f"{table.mean_ranks[m]:.2f}" for m in table.methods) + " |")
    if table.p_values:
        cells = ["" if table.p_values[m] is None else f"{table.p_values[m]:.3f}" for m in table.methods]
        lines.append(f"| p-value vs {table.reference} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def write_reports(table: ResultsTable, output: OutputSection) -> None:
    output.json_path.parent.mkdir(parents=True, exist_ok=True)
    output.json_path.write_text(table.model_dump_json(indent=2), encoding="utf-8")
    output.markdown_path.parent.mkdir(parents=True, exist_ok=True)
    output.markdown_path.write_text(render_markdown(table), encoding="utf-8")
    logger.info(f"Wrote {output.json_path} and {output.markdown_path}")


def load_results(path: str | Path) -> ResultsTable:
    try:
        return ResultsTable.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValidationError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read results table {path}: {exc}") from exc


@dataclass(frozen=True)
class GridCell:
    dataset: DatasetEntry
    method: MethodEntry
    label: str
    seed: int
    train_fraction: float
    architecture: ArchitectureSection
    overrides: TrainOverrides


@dataclass(frozen=True)
class CellResult:
    dataset: str
    method: str
    seed: int
    accuracy: float | None = None
    reason: str | None = None


def run_cell(cell: GridCell) -> CellResult:
    """Load, split, standardize, fit and evaluate one grid cell. Failures are returned, not raised."""
    try:
        train, test = prepare(cell.dataset.path, cell.dataset.label_column, cell.seed, cell.train_fraction)
        arch = ArchConfig.uniform(cell.method.layers, cell.architecture.sets, cell.architecture.kernels)
        trained, model, _ = fit(arch, train, cell.overrides.options(cell.method.objective, cell.seed))
        accuracy = evaluate(trained, model, train, test)
    except DeepMklError as exc:
        logger.warning(f"{cell.dataset.name} / {cell.label} / seed {cell.seed} failed: {exc}")
        return CellResult(cell.dataset.name, cell.label, cell.seed, reason=f"{type(exc).__name__}: {exc}")
    logger.info(f"{cell.dataset.name} / {cell.label} / seed {cell.seed}: accuracy {accuracy:.4f}")
    return CellResult(cell.dataset.name, cell.label, cell.seed, accuracy=accuracy)


async def _run_grid(cells: list[GridCell], workers: int) -> list[CellResult]:
    loop = asyncio.get_running_loop()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(await asyncio.gather(*(loop.run_in_executor(pool, run_cell, cell) for cell in cells)))


def run(experiment: ExperimentConfig) -> ResultsTable:
    labels = experiment.method_labels()
    cells = [
        GridCell(
            dataset=dataset,
            method=method,
            label=label,
            seed=seed,
            train_fraction=experiment.train_fraction,
            architecture=experiment.architecture,
            overrides=experiment.train,
        )
        for dataset in experiment.datasets
        for seed in experiment.seeds
        for method, label in zip(experiment.methods, labels, strict=True)
    ]
    logger.info(f"Running {len(cells)} cells with {experiment.workers} worker(s)")

    if experiment.workers > 1:
        results = asyncio.run(_run_grid(cells, experiment.workers))
    else:
        results = [run_cell(cell) for cell in cells]

    names = [dataset.name for dataset in experiment.datasets]
    accuracy = {name: {label: {seed: None for seed in experiment.seeds} for label in labels} for name in names}
    failures = []
    for result in results:
        accuracy[result.dataset][result.method][result.seed] = result.accuracy
        if result.reason is not None:
            failures.append(
                CellFailure(dataset=result.dataset, method=result.method, seed=result.seed, reason=result.reason)
            )

    table = ResultsTable(
        datasets=names,
        methods=labels,
        seeds=list(experiment.seeds),
        accuracy=accuracy,
        failures=failures,
        ties=experiment.ties,
    )
    return table.aggregate(reference=experiment.reference)
