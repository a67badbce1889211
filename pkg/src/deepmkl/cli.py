import argparse
import json
import sys
from pathlib import Path

import numpy as np
from loguru import logger

from .arch import ArchConfig
from .bench import ResultsTable, load_experiment, load_results, render_markdown, run, write_reports
from .bounds import BoundQuery, equivalent_ffn_width, pseudo_dim_bound, rademacher_bound
from .config import config
from .data import BENCHMARK_ACCURACY, BENCHMARK_METHODS
from .dataset import prepare
from .errors import DeepMklError
from .kernels import default_roster
from .span import SpanConfig
from .train import Objective, TrainOptions, evaluate, fit


def _configure_logging(level: str) -> None:
    logger.remove()
    logger.add(sys.stderr, level=level)


def _cmd_run(args: argparse.Namespace) -> int:
    experiment = load_experiment(args.config)
    if args.workers is not None:
        experiment.workers = args.workers
    table = run(experiment)
    write_reports(table, experiment.output)
    print(render_markdown(table), end="")
    if table.failures:
        logger.warning(f"{len(table.failures)} cell(s) failed; see 'failures' in {experiment.output.json_path}")
    return 0


def _cmd_bounds(args: argparse.Namespace) -> int:
    query = BoundQuery(layers=args.layers, sets=args.sets, kernels=args.kernels, u=args.u)
    width = (
        f"{equivalent_ffn_width(query.layers, query.sets, query.kernels):.4f}"
        if query.layers >= 2
        else "n/a (needs at least 2 layers)"
    )
    print(f"pseudo-dimension bound: {pseudo_dim_bound(query.layers, query.sets, query.kernels)}")
    print(f"Rademacher chaos bound: {rademacher_bound(query):.4f}")
    print(f"equivalent feed-forward width: {width}")
    return 0


def _cmd_fit(args: argparse.Namespace) -> int:
    train, test = prepare(args.data, args.label, args.seed, args.train_fraction)
    arch = ArchConfig.uniform(args.layers, args.sets, default_roster())
    opts = TrainOptions(
        objective=Objective(args.objective),
        step_sizes=config.step_size if args.step_size is None else args.step_size,
        max_iters=config.max_iters if args.iters is None else args.iters,
        C=config.c_svm if args.c_svm is None else args.c_svm,
        span=SpanConfig(eta=config.eta if args.eta is None else args.eta),
        seed=args.seed,
    )
    trained, model, report = fit(arch, train, opts)
    train_accuracy = evaluate(trained, model, train, train)
    test_accuracy = evaluate(trained, model, train, test)

    print(f"train accuracy: {train_accuracy:.4f}")
    print(f"test accuracy:  {test_accuracy:.4f}")
    print(f"support vectors: {model.n_sv} of {len(train)}")
    print(f"iterations: {report.iterations} ({report.termination.value})")

    if args.out:
        payload = {
            "architecture": trained.to_dict(),
            "svm": model.to_dict(),
            "train_accuracy": train_accuracy,
            "test_accuracy": test_accuracy,
            "report": report.to_dict(),
        }
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(payload, indent=2), encoding="utf-8")
        logger.info(f"Wrote model to {out}")
    return 0


def _published_table() -> ResultsTable:
    names = list(BENCHMARK_ACCURACY)
    grid = np.array([BENCHMARK_ACCURACY[name] for name in names]) / 100.0
    return ResultsTable.from_grid(names, list(BENCHMARK_METHODS), grid)


def _cmd_stats(args: argparse.Namespace) -> int:
    if args.table:
        table = load_results(args.table).aggregate(reference=args.reference, ties=args.ties)
    else:
        # The published rank row uses dense tie ranks.
        table = _published_table().aggregate(reference=args.reference or "span-3", ties=args.ties or "dense")
    print(render_markdown(table), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deepmkl", description="Deep multiple kernel learning benchmarks")
    parser.add_argument(
        "--log-level",
        type=str.upper,
        default=None,
        choices=["TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR"],
        help="Minimum log level written to stderr. Overrides config file and env var.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="Run a benchmark grid from an experiment file")
    run_parser.add_argument("--config", required=True, help="Experiment JSON file")
    run_parser.add_argument("--workers", type=int, default=None, help="Worker processes (overrides the file)")
    run_parser.set_defaults(handler=_cmd_run)

    bounds_parser = commands.add_parser("bounds", help="Capacity bounds for an architecture")
    bounds_parser.add_argument("--layers", type=int, required=True)
    bounds_parser.add_argument("--sets", type=int, required=True)
    bounds_parser.add_argument("--kernels", type=int, required=True)
    bounds_parser.add_argument("--u", type=float, default=1.0, help="Upper bound on the kernel values")
    bounds_parser.set_defaults(handler=_cmd_bounds)

    fit_parser = commands.add_parser("fit", help="Train one architecture on one dataset split")
    fit_parser.add_argument("--data", required=True, help="CSV file with a header row")
    fit_parser.add_argument("--label", required=True, help="Name of the label column")
    fit_parser.add_argument("--layers", type=int, default=2)
    fit_parser.add_argument("--sets", type=int, default=1)
    fit_parser.add_argument("--objective", choices=[o.value for o in Objective], default=Objective.SPAN.value)
    fit_parser.add_argument("--eta", type=float, default=None)
    fit_parser.add_argument("--c-svm", type=float, default=None)
    fit_parser.add_argument("--iters", type=int, default=None)
    fit_parser.add_argument("--step-size", type=float, default=None)
    fit_parser.add_argument("--seed", type=int, default=0)
    fit_parser.add_argument("--train-fraction", type=float, default=None)
    fit_parser.add_argument("--out", default=None, help="Write the trained model as JSON")
    fit_parser.set_defaults(handler=_cmd_fit)

    stats_parser = commands.add_parser("stats", help="Ranks and p-values of a results table")
    stats_parser.add_argument("--table", default=None, help="results.json from 'run'; the published grid if omitted")
    stats_parser.add_argument("--reference", default=None, help="Reference method (default: span-3 or the table's own)")
    stats_parser.add_argument("--ties", choices=["average", "min", "dense"], default=None)
    stats_parser.set_defaults(handler=_cmd_stats)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.log_level:
        config.log_level = args.log_level
    _configure_logging(config.log_level)

    try:
        return args.handler(args)
    except DeepMklError as exc:
        logger.error(str(exc))
        return 1
