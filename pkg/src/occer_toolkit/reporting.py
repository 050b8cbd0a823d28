"""Output writers for evaluation reports, benchmark tables and score files."""

import io
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from rich.table import Table

from .evaluation import EvalReport

logger = logging.getLogger(__name__)

ERROR_CELL = "error"
FOLD_COLUMNS = ["dataset", "method", "fold", "auc"]


class BenchFailure(BaseModel):
    """A (dataset, method) combination that could not be evaluated."""
    dataset: str
    method: str
    error: str


class BenchResult(BaseModel):
    """Everything a benchmark run produced."""
    config: Dict[str, Any] = Field(default_factory=dict)
    datasets: List[str] = Field(default_factory=list, description="Dataset names in run order")
    methods: List[str] = Field(default_factory=list, description="Method labels in configured order")
    reports: List[EvalReport] = Field(default_factory=list)
    failures: List[BenchFailure] = Field(default_factory=list)

    def sorted_reports(self) -> List[EvalReport]:
        order = {m: i for i, m in enumerate(self.methods)}
        return sorted(self.reports, key=lambda r: (r.dataset, order.get(r.method, len(order)), r.method))


def fold_frame(reports: Sequence[EvalReport]) -> pd.DataFrame:
    """Long table with one row per (dataset, method, fold)."""
    rows = [row for report in reports for row in report.fold_rows()]
    return pd.DataFrame(rows, columns=FOLD_COLUMNS)


def wide_table(result: BenchResult) -> pd.DataFrame:
    """
    Mean AUC per dataset (rows, sorted) and method (columns, configured order).

    Failed combinations hold the string ``"error"``; combinations never run
    stay empty.
    """
    datasets = sorted(set(result.datasets) | {r.dataset for r in result.reports}
                      | {f.dataset for f in result.failures})
    methods = list(result.methods)
    for extra in [r.method for r in result.reports] + [f.method for f in result.failures]:
        if extra not in methods:
            methods.append(extra)

    table = pd.DataFrame(index=pd.Index(datasets, name="dataset"), columns=methods, dtype=object)
    for report in result.reports:
        table.loc[report.dataset, report.method] = report.mean_auc
    for failure in result.failures:
        table.loc[failure.dataset, failure.method] = ERROR_CELL
    return table


def save_bench(result: BenchResult, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write ``auc_table.csv``, ``auc_folds.csv`` and ``bench.json`` into ``out_dir``.

    The CSV files depend only on the reports, so a rerun with the same
    configuration reproduces them byte for byte.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "table": out_dir / "auc_table.csv",
        "folds": out_dir / "auc_folds.csv",
        "run": out_dir / "bench.json",
    }

    wide_table(result).to_csv(paths["table"])
    fold_frame(result.sorted_reports()).to_csv(paths["folds"], index=False)

    record = result.model_dump(mode="json")
    record["reports"] = [r.model_dump(mode="json") for r in result.sorted_reports()]
    with open(paths["run"], "w", encoding="utf-8") as f:
        json.dump(record, f, indent=2)

    logger.info(f"Saved benchmark results to {out_dir}")
    return paths


def render_wide_table(result: BenchResult) -> Table:
    """Rich table of mean AUCs for terminal display."""
    table_data = wide_table(result)
    table = Table(title="Mean ROC-AUC (5x2 CV)")
    table.add_column("dataset", style="bold")
    for method in table_data.columns:
        table.add_column(str(method), justify="right")
    for dataset, row in table_data.iterrows():
        cells = []
        for value in row:
            if isinstance(value, float) and not np.isnan(value):
                cells.append(f"{value:.5f}")
            elif value == ERROR_CELL:
                cells.append(f"[red]{ERROR_CELL}[/red]")
            else:
                cells.append("")
        table.add_row(str(dataset), *cells)
    return table


def render_rmse_table(feature_names: Sequence[str], rmses: Sequence[float], active: Sequence[int]) -> Table:
    """Per-feature training RMSE of an OCCER model, active regressors marked."""
    table = Table(title="Training RMSE per regressor")
    table.add_column("feature")
    table.add_column("rmse", justify="right")
    table.add_column("active", justify="center")
    active_set = set(active)
    for i, (name, rmse) in enumerate(zip(feature_names, rmses)):
        table.add_row(name, f"{rmse:.6g}", "yes" if i in active_set else "no")
    return table


def format_scores(
    scores: np.ndarray,
    fmt: str = "csv",
    threshold: Optional[float] = None,
    config: Optional[Dict[str, Any]] = None,
) -> str:
    """
    Serialize scores as CSV (``outlier_score`` and optional ``flag``) or JSON.

    Flags mark scores strictly above ``threshold``. Floats keep full precision.
    """
    scores = np.asarray(scores, dtype=np.float64)
    flags = None if threshold is None else (scores > threshold).astype(int)

    if fmt == "json":
        payload: Dict[str, Any] = {"config": config or {}, "scores": scores.tolist()}
        if flags is not None:
            payload["threshold"] = threshold
            payload["flags"] = flags.tolist()
        return json.dumps(payload, indent=2) + "\n"

    frame = pd.DataFrame({"outlier_score": scores})
    if flags is not None:
        frame["flag"] = flags
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def save_scores(
    text: str,
    path: Union[str, Path],
    config: Optional[Dict[str, Any]] = None,
    threshold: Optional[float] = None,
) -> Path:
    """Write a score file plus its ``<path>.meta.json`` sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")

    meta_path = path.with_name(path.name + ".meta.json")
    with open(meta_path, "w", encoding="utf-8") as f:
        json.dump({"config": config or {}, "threshold": threshold}, f, indent=2)
    logger.info(f"Saved scores to {path}")
    return path
