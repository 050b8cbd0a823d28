"""Command-line interface for the OCCER toolkit."""

import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Tuple, Type

import click
import numpy as np
import structlog
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from .config import METHODS, BenchConfig, RunConfig, merge_config, parse_overrides, read_config_file
from .dataset import Dataset
from .detectors import build_detector, method_label
from .errors import ConfigError, DataError, ModelError
from .evaluation import run_cv
from .loaders import get_dataset_info, load_dataset
from .occer import OccerModel, threshold_from_training
from .persistence import load_config_snapshot, load_model, save_model
from .reporting import (
    BenchFailure,
    BenchResult,
    format_scores,
    render_rmse_table,
    render_wide_table,
    save_bench,
    save_scores,
)

EXIT_CONFIG = 2
EXIT_DATA = 3

# Diagnostics go to stderr, results to stdout.
console = Console(stderr=True)
out_console = Console()
logger = structlog.get_logger(__name__)


def setup_logging(debug: bool = False):
    """Route stdlib logging and structlog through a rich handler on stderr."""
    level = logging.DEBUG if debug else logging.INFO

    env_level = os.getenv("LOG_LEVEL", "").upper()
    if env_level in ["DEBUG", "INFO", "WARNING", "ERROR"]:
        level = getattr(logging, env_level)

    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(console=console, rich_tracebacks=True, show_path=False)],
        force=True,
    )
    logging.getLogger("occer_toolkit").setLevel(level)

    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.processors.format_exc_info,
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        logger_factory=structlog.stdlib.LoggerFactory(),
        wrapper_class=structlog.stdlib.BoundLogger,
        cache_logger_on_first_use=False,
    )

    if debug:
        logger.debug("Debug logging enabled")


@contextmanager
def handle_errors(debug: bool) -> Iterator[None]:
    """Map toolkit exceptions to a one-line diagnostic and the exit-code contract."""
    try:
        yield
    except (ConfigError, ValidationError) as e:
        _fail(f"Configuration error: {_one_line(e)}", EXIT_CONFIG, debug)
    except (DataError, ModelError, FileNotFoundError) as e:
        _fail(f"Data error: {_one_line(e)}", EXIT_DATA, debug)


def _one_line(error: Exception) -> str:
    if isinstance(error, ValidationError):
        return "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in error.errors()
        )
    return " ".join(str(error).split())


def _fail(message: str, code: int, debug: bool) -> None:
    logging.getLogger(__name__).error(message)
    if debug:
        logging.getLogger(__name__).exception("Full traceback:")
    sys.exit(code)


def build_config(model: Type[RunConfig], config_path: Optional[Path], flags: Dict[str, Any]) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    file_values = read_config_file(config_path) if config_path else {}
    return model(**merge_config(file_values, flags))


def _load(config: RunConfig, path: Path) -> Dataset:
    return load_dataset(path, config.label_col, config.target_label, config.has_header)


def _data_options(func):
    """Options shared by every command that reads a dataset."""
    for option in reversed([
        click.option("--label-col", type=str, default=None, help="Name of the class label column"),
        click.option("--target-label", type=str, default=None, help="Label value of the target class"),
        click.option("--no-header", is_flag=True, help="Dataset file has no header row (columns col_0, col_1, ...)"),
    ]):
        func = option(func)
    return func


@click.group()
@click.option("--debug", is_flag=True, help="Enable debug logging")
@click.version_option(package_name="occer-toolkit")
@click.pass_context
def main(ctx: click.Context, debug: bool):
    """
    OCCER: one-class outlier detection with ensembles of regression models.

    Example usage:

        occer fit --data train.csv --method occer-rf --out model.json

        occer score --model model.json --data test.csv --threshold-quantile 0.95

        occer bench --data breast.csv --label-col class --target-label 0 \\
                    --method occer-ridge --method occer-rf --method lof --out results/
    """
    ctx.ensure_object(dict)
    ctx.obj["debug"] = debug
    setup_logging(debug)


@main.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
              help="Key-value config file; flags take precedence")
@click.option("--data", type=click.Path(path_type=Path), default=None, help="Training dataset (CSV)")
@_data_options
@click.option("--method", type=str, default=None, help=f"One of: {', '.join(METHODS)}")
@click.option("--keep-fraction", type=float, default=None, help="Share of regressors kept (OCCER only)")
@click.option("--seed", type=int, default=None, help="Random seed")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Model file (default: model.json)")
@click.option("--set", "overrides", multiple=True, metavar="FIELD=VALUE", help="Regressor spec override")
@click.option("--workers", type=int, default=None, help="Worker threads (default: $OCCER_WORKERS or 1)")
@click.pass_context
def fit(
    ctx: click.Context,
    config_path: Optional[Path],
    data: Optional[Path],
    label_col: Optional[str],
    target_label: Optional[str],
    no_header: bool,
    method: Optional[str],
    keep_fraction: Optional[float],
    seed: Optional[int],
    out: Optional[Path],
    overrides: Tuple[str, ...],
    workers: Optional[int],
):
    """Train a detector on the target rows of a dataset and save it as JSON."""
    debug = ctx.obj["debug"]
    with handle_errors(debug):
        config = build_config(RunConfig, config_path, {
            "data": [data] if data else None,
            "label_col": label_col,
            "target_label": target_label,
            "has_header": False if no_header else None,
            "method": method,
            "keep_fraction": keep_fraction,
            "seed": seed,
            "out": out,
            "spec": parse_overrides(overrides),
            "workers": workers,
        })
        if not config.data:
            raise ConfigError("A training dataset is required (--data)")
        detector = build_detector(config)

        dataset = _load(config, config.data[0])
        train = dataset.target_rows() if dataset.has_labels else dataset
        if train.n_rows == 0:
            raise DataError(f"{config.data[0]} contains no target rows")

        logger.info("Training detector", method=detector.name, rows=train.n_rows, features=train.n_features)
        model = detector.fit(train)
        path = save_model(model, config.out or Path("model.json"), config.snapshot())

        if isinstance(model, OccerModel):
            out_console.print(render_rmse_table(model.feature_names, model.training_rmses, model.active_indices))
        out_console.print(f"Saved {model.kind} model to {path}")


@main.command()
@click.option("--model", "model_path", type=click.Path(path_type=Path), required=True, help="Model file from 'fit'")
@click.option("--data", type=click.Path(path_type=Path), required=True, help="Dataset to score")
@_data_options
@click.option("--no-label", is_flag=True, help="Ignore the label column recorded in the model file")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Score file (default: stdout)")
@click.option("--format", "fmt", type=str, default=None, help="Output format: csv or json")
@click.option("--threshold-quantile", type=float, default=None,
              help="Add a flag column for scores above this quantile of the training scores")
@click.pass_context
def score(
    ctx: click.Context,
    model_path: Path,
    data: Path,
    label_col: Optional[str],
    target_label: Optional[str],
    no_header: bool,
    no_label: bool,
    out: Optional[Path],
    fmt: Optional[str],
    threshold_quantile: Optional[float],
):
    """Score every row of a dataset with a saved model."""
    debug = ctx.obj["debug"]
    with handle_errors(debug):
        model = load_model(model_path)
        trained = load_config_snapshot(model_path)
        inherited = ("has_header",) if no_label else ("label_col", "target_label", "has_header")

        # Unset data flags fall back to how the model's training file was read.
        config = RunConfig(**merge_config(
            {key: trained[key] for key in inherited if key in trained},
            {
                "data": [data],
                "label_col": label_col,
                "target_label": target_label,
                "has_header": False if no_header else None,
                "out": out,
                "format": fmt,
                "threshold_quantile": threshold_quantile,
                "workers": 1,
            },
        ))

        if data.exists() and data.stat().st_size == 0:
            scores = np.empty(0)
        else:
            scores = model.score_dataset(_load(config, data))

        threshold = None
        if config.threshold_quantile is not None:
            threshold = threshold_from_training(model, config.threshold_quantile)

        snapshot = {**config.snapshot(), "model": str(model_path), "model_config": trained}
        text = format_scores(scores, config.format, threshold, snapshot)
        if config.out is None:
            click.echo(text, nl=False)
        else:
            save_scores(text, config.out, snapshot, threshold)
            console.print(f"Scored {scores.size} rows -> {config.out}")


def _bench_combinations(config: BenchConfig) -> List[Tuple[str, float]]:
    """(method, keep_fraction) pairs; baselines run once regardless of keep fraction."""
    combos: List[Tuple[str, float]] = []
    seen = set()
    for method in config.methods:
        fractions = config.keep_fractions if METHODS[method].family == "occer" else [1.0]
        for fraction in fractions:
            label = method_label(method, fraction)
            if label not in seen:
                seen.add(label)
                combos.append((method, fraction))
    return combos


@main.command()
@click.option("--config", "config_path", type=click.Path(path_type=Path), default=None,
              help="Key-value config file; flags take precedence")
@click.option("--data", multiple=True, type=click.Path(path_type=Path), help="Labeled dataset (repeatable)")
@_data_options
@click.option("--method", "methods", multiple=True, type=str, help="Method to evaluate (repeatable)")
@click.option("--keep-fraction", "keep_fractions", multiple=True, type=float,
              help="OCCER ensemble keep fraction (repeatable)")
@click.option("--seed", type=int, default=None, help="Seed of the fold plans and forests")
@click.option("--out", type=click.Path(path_type=Path), default=None, help="Output directory (default: results)")
@click.option("--set", "overrides", multiple=True, metavar="FIELD=VALUE", help="Regressor spec override")
@click.option("--workers", type=int, default=None, help="Combinations evaluated concurrently")
@click.pass_context
def bench(
    ctx: click.Context,
    config_path: Optional[Path],
    data: Tuple[Path, ...],
    label_col: Optional[str],
    target_label: Optional[str],
    no_header: bool,
    methods: Tuple[str, ...],
    keep_fractions: Tuple[float, ...],
    seed: Optional[int],
    out: Optional[Path],
    overrides: Tuple[str, ...],
    workers: Optional[int],
):
    """Stratified 5x2 cross-validation over every (dataset, method, keep fraction)."""
    debug = ctx.obj["debug"]
    with handle_errors(debug):
        config = build_config(BenchConfig, config_path, {
            "data": list(data),
            "label_col": label_col,
            "target_label": target_label,
            "has_header": False if no_header else None,
            "methods": list(methods),
            "keep_fractions": list(keep_fractions),
            "seed": seed,
            "out": out,
            "spec": parse_overrides(overrides),
            "workers": workers,
        })
        if not config.data:
            raise ConfigError("At least one dataset is required (--data)")
        if config.label_col is None:
            raise ConfigError("Benchmarks need labeled data (--label-col and --target-label)")

        # Combinations run in parallel; each detector stays single-threaded.
        serial = config.model_copy(update={"workers": 1})
        detectors = [build_detector(serial, method, fraction) for method, fraction in _bench_combinations(config)]
        result = BenchResult(config=config.snapshot(), methods=[d.name for d in detectors])

        jobs = []
        for path in config.data:
            try:
                dataset = _load(config, path)
            except (DataError, FileNotFoundError) as e:
                logger.warning("Dataset failed to load", dataset=str(path), error=str(e))
                result.datasets.append(path.stem)
                result.failures.extend(
                    BenchFailure(dataset=path.stem, method=d.name, error=str(e)) for d in detectors
                )
                continue
            result.datasets.append(dataset.name)
            jobs.extend((dataset, detector) for detector in detectors)

        def evaluate(job):
            dataset, detector = job
            settings = {"method": detector.name, "seed": config.seed, **detector.settings()}
            return run_cv(dataset, detector, config.seed, config=settings)

        with Progress(
            TextColumn("[progress.description]{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            console=console,
            transient=True,
        ) as progress:
            task = progress.add_task("Cross-validating...", total=len(jobs))
            with ThreadPoolExecutor(max_workers=config.workers) as executor:
                futures = {executor.submit(evaluate, job): job for job in jobs}
                for future in as_completed(futures):
                    dataset, detector = futures[future]
                    try:
                        result.reports.append(future.result())
                    except Exception as e:
                        logger.warning("Combination failed", dataset=dataset.name, method=detector.name, error=str(e))
                        result.failures.append(
                            BenchFailure(dataset=dataset.name, method=detector.name, error=str(e))
                        )
                    progress.advance(task)

        result.failures.sort(key=lambda f: (f.dataset, result.methods.index(f.method)))
        paths = save_bench(result, config.out or Path("results"))

        out_console.print(render_wide_table(result))
        for name, path in paths.items():
            out_console.print(f"  {name}: {path}")


@main.command()
@click.argument("path", type=click.Path(path_type=Path))
@_data_options
@click.pass_context
def info(
    ctx: click.Context,
    path: Path,
    label_col: Optional[str],
    target_label: Optional[str],
    no_header: bool,
):
    """Show row, feature and class counts of a dataset file."""
    with handle_errors(ctx.obj["debug"]):
        details = get_dataset_info(path, label_col, target_label, has_header=not no_header)
        click.echo(json.dumps(details, indent=2))
        if "error" in details:
            raise DataError(details["error"])


if __name__ == "__main__":
    main()
