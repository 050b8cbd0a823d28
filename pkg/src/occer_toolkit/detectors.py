"""Method descriptors: every detector fits on target rows and scores datasets.

OCCER and the baselines share the same normalization path, so every method
sees identical z-scored inputs.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Protocol, Union

import numpy as np

from .baselines import IsolationForestModel, LofModel, fit_iforest, fit_lof
from .config import METHODS, RegressorSpec, RunConfig
from .dataset import Dataset, NormalizationParams, apply_normalizer, fit_normalizer, normalize_matrix
from .errors import DataError
from .occer import OccerModel, fit_occer, prune

logger = logging.getLogger(__name__)


class FittedDetector(Protocol):
    kind: str
    normalizer: NormalizationParams
    training_scores: Optional[np.ndarray]

    def score_dataset(self, data: Dataset) -> np.ndarray:
        ...


class Detector(Protocol):
    name: str

    def settings(self) -> Dict[str, Any]:
        """Hyperparameters recorded in evaluation reports."""
        ...

    def fit(self, train: Dataset) -> FittedDetector:
        ...


def method_label(method: str, keep_fraction: float) -> str:
    """Report column name, e.g. ``occer-rf`` or ``occer-rf@0.25``."""
    if METHODS[method].family != "occer" or keep_fraction == 1.0:
        return method
    return f"{method}@{keep_fraction:g}"


def _check_training(train: Dataset) -> None:
    if train.outlier_count:
        raise DataError(f"Training data contains {train.outlier_count} outlier rows")


@dataclass(frozen=True)
class OccerDetector:
    """OCCER with a regressor spec and an ensemble keep fraction."""
    name: str
    spec: RegressorSpec
    keep_fraction: float = 1.0
    n_jobs: int = 1

    def settings(self) -> Dict[str, Any]:
        return {"keep_fraction": self.keep_fraction, "spec": self.spec.model_dump(mode="json")}

    def fit(self, train: Dataset) -> OccerModel:
        model = fit_occer(train, self.spec, n_jobs=self.n_jobs)
        if self.keep_fraction == 1.0:
            return model
        pruned = prune(model, self.keep_fraction)
        return pruned.with_training_scores(pruned.score_dataset(train))


class BaselineModel:
    """A fitted baseline plus the normalizer it was trained under."""

    def __init__(
        self,
        normalizer: NormalizationParams,
        model: Union[LofModel, IsolationForestModel],
        training_scores: Optional[np.ndarray] = None,
    ):
        self.normalizer = normalizer
        self.model = model
        self.kind = model.kind
        self.training_scores = None if training_scores is None else np.asarray(training_scores, dtype=np.float64)

    @property
    def n_features(self) -> int:
        return self.normalizer.n_features

    def score_dataset(self, data: Dataset) -> np.ndarray:
        if data.n_features != self.n_features:
            raise DataError(f"Model expects {self.n_features} features, got {data.n_features}")
        return self.model.scores(normalize_matrix(self.normalizer, data.features))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "model": self.model.to_dict(),
            "training_scores": None if self.training_scores is None else self.training_scores.tolist(),
        }


@dataclass(frozen=True)
class LofDetector:
    name: str = "lof"
    k: int = 20

    def settings(self) -> Dict[str, Any]:
        return {"k": self.k}

    def fit(self, train: Dataset) -> BaselineModel:
        _check_training(train)
        normalizer = fit_normalizer(train)
        Z = apply_normalizer(normalizer, train).features
        k = self.k
        if k >= Z.shape[0]:
            # small folds: shrink k to n - 1
            k = Z.shape[0] - 1
            logger.warning(f"LOF k={self.k} exceeds training size; using k={k}")
        model = fit_lof(Z, k)
        return BaselineModel(normalizer, model, model.training_scores)


@dataclass(frozen=True)
class IsolationForestDetector:
    name: str = "iforest"
    n_trees: int = 100
    subsample_size: int = 256
    seed: int = 0
    n_jobs: int = 1

    def settings(self) -> Dict[str, Any]:
        return {"n_trees": self.n_trees, "subsample_size": self.subsample_size, "seed": self.seed}

    def fit(self, train: Dataset) -> BaselineModel:
        _check_training(train)
        normalizer = fit_normalizer(train)
        Z = apply_normalizer(normalizer, train).features
        model = fit_iforest(Z, self.n_trees, self.subsample_size, self.seed, self.n_jobs)
        return BaselineModel(normalizer, model, model.scores(Z))


def build_detector(
    config: RunConfig,
    method: Optional[str] = None,
    keep_fraction: Optional[float] = None,
) -> Detector:
    """Detector for ``method`` (default ``config.method``) with config settings applied."""
    method = method or config.method
    keep_fraction = config.keep_fraction if keep_fraction is None else keep_fraction
    family = METHODS[method].family
    if family == "occer":
        return OccerDetector(
            name=method_label(method, keep_fraction),
            spec=config.regressor_spec(method),
            keep_fraction=keep_fraction,
            n_jobs=config.workers,
        )
    if family == "lof":
        return LofDetector(name=method, k=config.lof_k)
    return IsolationForestDetector(
        name=method,
        n_trees=config.iforest_trees,
        subsample_size=config.iforest_subsample,
        seed=config.seed,
        n_jobs=config.workers,
    )
