"""ROC-AUC and the stratified 5x2-fold cross-validation protocol."""

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.stats import rankdata

from .dataset import OUTLIER, Dataset
from .detectors import Detector
from .errors import DataError, FoldError
from .regression.rng import make_generator

logger = structlog.get_logger(__name__)

N_REPETITIONS = 5
N_FOLDS = 2


def _outlier_mask(labels) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.dtype.kind in {"U", "S", "O"}:
        return labels == OUTLIER
    return labels.astype(bool)


def roc_auc(scores, labels) -> float:
    """
    Area under the ROC curve, with higher scores meaning more outlier-like.

    Computed exactly from average ranks (Mann-Whitney U): the probability that
    an outlier outscores a target point, counting ties as one half.

    Args:
        scores: Outlier scores
        labels: Per-row tags, either booleans/0-1 with 1 = outlier or the
            strings ``"target"``/``"outlier"``

    Raises:
        DataError: On length mismatch, non-finite scores, or a single class
    """
    scores = np.asarray(scores, dtype=np.float64).reshape(-1)
    outlier = _outlier_mask(labels).reshape(-1)
    if scores.shape[0] != outlier.shape[0]:
        raise DataError(f"Got {scores.shape[0]} scores for {outlier.shape[0]} labels")
    if not np.isfinite(scores).all():
        raise DataError("Scores contain non-finite values")
    n_outlier = int(outlier.sum())
    n_target = outlier.size - n_outlier
    if n_outlier == 0 or n_target == 0:
        raise DataError("ROC-AUC needs both target and outlier rows")

    ranks = rankdata(scores, method="average")
    u_statistic = ranks[outlier].sum() - n_outlier * (n_outlier + 1) / 2.0
    return float(u_statistic / (n_outlier * n_target))


class Fold(BaseModel):
    """One train/test split of a repetition."""
    model_config = ConfigDict(frozen=True)

    repetition: int
    index: int
    train: Tuple[int, ...]
    test: Tuple[int, ...]


class FoldPlan(BaseModel):
    """Seeded repetitions of stratified k-fold splits."""
    model_config = ConfigDict(frozen=True)

    seed: int
    repetitions: Tuple[Tuple[Fold, ...], ...]

    @property
    def folds(self) -> List[Fold]:
        """All folds ordered by (repetition, fold)."""
        return [fold for repetition in self.repetitions for fold in repetition]


def make_fold_plan(
    data: Dataset,
    seed: int,
    n_repetitions: int = N_REPETITIONS,
    n_folds: int = N_FOLDS,
) -> FoldPlan:
    """
    Stratified repeated k-fold plan (5x2 by default).

    Repetition ``r`` shuffles each class with the generator for ``seed + r``
    and deals the shuffled rows round-robin into folds, so every fold keeps the
    class ratio within one row per class. The test sets of a repetition
    partition all rows; each fold trains on the rows outside its test set.

    Raises:
        DataError: If the data is unlabeled or a class has fewer than
            ``n_folds`` rows
    """
    if not data.has_labels:
        raise DataError("Cross-validation needs labeled data")
    target = np.flatnonzero(~data.labels)
    outlier = np.flatnonzero(data.labels)
    for name, rows in (("target", target), ("outlier", outlier)):
        if rows.size < n_folds:
            raise DataError(f"The {name} class has {rows.size} rows; need at least {n_folds}")

    all_rows = np.arange(data.n_rows)
    repetitions = []
    for r in range(n_repetitions):
        rng = make_generator(seed + r)
        order = np.concatenate([rng.permutation(target), rng.permutation(outlier)])
        assignment = np.empty(data.n_rows, dtype=np.intp)
        assignment[order] = np.arange(order.size) % n_folds
        folds = []
        for f in range(n_folds):
            in_test = assignment == f
            folds.append(Fold(
                repetition=r,
                index=f,
                train=tuple(int(i) for i in all_rows[~in_test]),
                test=tuple(int(i) for i in all_rows[in_test]),
            ))
        repetitions.append(tuple(folds))
    return FoldPlan(seed=seed, repetitions=tuple(repetitions))


class EvalReport(BaseModel):
    """Per-fold and averaged AUC for one (dataset, method, config)."""
    model_config = ConfigDict(frozen=True)

    dataset: str
    method: str
    fold_aucs: List[float] = Field(description="AUC per fold, ordered by (repetition, fold)")
    mean_auc: float
    config: Dict[str, Any] = Field(default_factory=dict)

    @model_validator(mode="after")
    def consistent(self):
        if not self.fold_aucs:
            raise ValueError("A report needs at least one fold")
        if any(not 0.0 <= auc <= 1.0 for auc in self.fold_aucs):
            raise ValueError("Fold AUCs must lie in [0, 1]")
        if self.mean_auc != float(np.mean(self.fold_aucs)):
            raise ValueError("mean_auc must be the mean of the fold AUCs")
        return self

    @classmethod
    def from_folds(
        cls, dataset: str, method: str, fold_aucs: Sequence[float], config: Optional[Dict[str, Any]] = None,
    ) -> "EvalReport":
        aucs = [float(a) for a in fold_aucs]
        return cls(
            dataset=dataset, method=method, fold_aucs=aucs,
            mean_auc=float(np.mean(aucs)), config=config or {},
        )

    def fold_rows(self) -> List[Dict[str, Any]]:
        """Rows for the per-fold CSV: dataset, method, fold, auc."""
        return [
            {"dataset": self.dataset, "method": self.method, "fold": i, "auc": auc}
            for i, auc in enumerate(self.fold_aucs)
        ]


def evaluate_fold(data: Dataset, detector: Detector, fold: Fold) -> float:
    """Fit on the target rows of the fold's training part; AUC on its test part."""
    try:
        train = data.subset(fold.train).target_rows()
        test = data.subset(fold.test)
        model = detector.fit(train)
        return roc_auc(model.score_dataset(test), test.labels)
    except Exception as e:
        raise FoldError(str(e), fold.repetition, fold.index) from e


def run_cv(
    data: Dataset,
    detector: Detector,
    seed: int,
    workers: int = 1,
    plan: Optional[FoldPlan] = None,
    config: Optional[Dict[str, Any]] = None,
) -> EvalReport:
    """
    Stratified 5x2-fold cross-validation of ``detector`` on ``data``.

    In every fold the detector (normalizer included) is refit on the
    target-class rows of the training part only and scores every test row.

    Args:
        data: Labeled dataset
        detector: Method descriptor
        seed: Seed of the fold plan
        workers: Folds evaluated concurrently; results keep fold order
        plan: Precomputed plan, mainly for instrumentation
        config: Snapshot embedded in the report

    Raises:
        DataError: If the data cannot be split
        FoldError: If fitting or scoring fails in a fold
    """
    plan = plan or make_fold_plan(data, seed)
    folds = plan.folds
    logger.info("Running cross-validation", dataset=data.name, method=detector.name, folds=len(folds))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            aucs = list(executor.map(lambda fold: evaluate_fold(data, detector, fold), folds))
    else:
        aucs = [evaluate_fold(data, detector, fold) for fold in folds]

    report = EvalReport.from_folds(data.name, detector.name, aucs, {"seed": seed, **(config or {})})
    logger.info("Cross-validation finished", dataset=data.name, method=detector.name, mean_auc=report.mean_auc)
    return report
