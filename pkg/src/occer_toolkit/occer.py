"""OCCER: one-class classification by an ensemble of per-feature regressors.

Each feature is predicted from all the others by its own regressor; a point's
outlier score is the mean absolute prediction error over the active
regressors, measured on z-normalized values.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import structlog

from . import regression
from .config import RegressorSpec
from .dataset import Dataset, NormalizationParams, apply_normalizer, fit_normalizer, normalize_matrix
from .errors import ConfigError, DataError, ModelError

logger = structlog.get_logger(__name__)

KIND = "occer"


class OccerModel:
    """Trained OCCER ensemble.

    Regressor ``i`` predicts feature ``i`` from the other m-1 features. The
    model is immutable; ``prune`` returns a new view sharing the regressors.
    """

    kind = KIND

    def __init__(
        self,
        normalizer: NormalizationParams,
        regressors: Sequence[regression.FittedRegressor],
        training_rmses: Sequence[float],
        spec: RegressorSpec,
        active_indices: Optional[Sequence[int]] = None,
        training_scores: Optional[Sequence[float]] = None,
        feature_names: Optional[Sequence[str]] = None,
    ):
        m = normalizer.n_features
        if len(regressors) != m or len(training_rmses) != m:
            raise ModelError(
                f"Expected {m} regressors and RMSEs, got {len(regressors)} and {len(training_rmses)}"
            )
        for i, model in enumerate(regressors):
            if model.n_inputs != m - 1:
                raise ModelError(f"Regressor {i} has input width {model.n_inputs}, expected {m - 1}")

        active = tuple(range(m)) if active_indices is None else tuple(int(i) for i in active_indices)
        if not active:
            raise ModelError("active_indices must not be empty")
        if any(b <= a for a, b in zip(active, active[1:])) or active[0] < 0 or active[-1] >= m:
            raise ModelError(f"active_indices must be strictly increasing within 0..{m - 1}")

        self.normalizer = normalizer
        self.regressors: Tuple[regression.FittedRegressor, ...] = tuple(regressors)
        self.training_rmses: Tuple[float, ...] = tuple(float(r) for r in training_rmses)
        self.spec = spec
        self.active_indices = active
        self.training_scores = None if training_scores is None else np.asarray(training_scores, dtype=np.float64)
        self.feature_names = tuple(feature_names) if feature_names else tuple(f"x{i + 1}" for i in range(m))

    @property
    def n_features(self) -> int:
        return self.normalizer.n_features

    def with_active(self, active_indices: Sequence[int]) -> "OccerModel":
        """Same regressors with a different active subset.

        Stored training scores only carry over when the subset is unchanged.
        """
        active = tuple(int(i) for i in active_indices)
        scores = self.training_scores if active == self.active_indices else None
        return OccerModel(
            self.normalizer, self.regressors, self.training_rmses, self.spec,
            active, scores, self.feature_names,
        )

    def with_training_scores(self, scores: Sequence[float]) -> "OccerModel":
        return OccerModel(
            self.normalizer, self.regressors, self.training_rmses, self.spec,
            self.active_indices, scores, self.feature_names,
        )

    def score_dataset(self, data: Dataset) -> np.ndarray:
        return score_dataset(self, data)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "spec": self.spec.model_dump(mode="json"),
            "feature_names": list(self.feature_names),
            "regressors": [model.to_dict() for model in self.regressors],
            "training_rmses": list(self.training_rmses),
            "active_indices": list(self.active_indices),
            "training_scores": None if self.training_scores is None else self.training_scores.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], normalizer: NormalizationParams) -> "OccerModel":
        try:
            return cls(
                normalizer=normalizer,
                regressors=[regression.regressor_from_dict(r) for r in data["regressors"]],
                training_rmses=data["training_rmses"],
                spec=RegressorSpec(**data["spec"]),
                active_indices=data["active_indices"],
                training_scores=data.get("training_scores"),
                feature_names=data.get("feature_names"),
            )
        except (KeyError, TypeError) as e:
            raise ModelError(f"Invalid OCCER payload: {e}") from e


def _feature_spec(spec: RegressorSpec, index: int) -> RegressorSpec:
    if spec.kind != "random_forest":
        return spec
    return spec.model_copy(update={"seed": spec.seed + index})


def fit_occer(train: Dataset, spec: RegressorSpec, n_jobs: int = 1) -> OccerModel:
    """
    Fit one regressor per feature on z-normalized target-class rows.

    Args:
        train: Target-class training data (labeled outlier rows are rejected)
        spec: Regressor kind and hyperparameters; forests for feature ``i``
            use seed ``spec.seed + i``
        n_jobs: Threads used to train the m regressors; results are identical
            to sequential training

    Returns:
        OccerModel with every regressor active

    Raises:
        DataError: If outlier rows are present, m < 2, or n < 2
    """
    if train.n_features < 2:
        raise DataError(f"OCCER needs at least 2 features, got {train.n_features}")
    if train.outlier_count:
        raise DataError(f"Training data contains {train.outlier_count} outlier rows")

    normalizer = fit_normalizer(train)
    Z = apply_normalizer(normalizer, train).features
    m = train.n_features

    logger.info("Fitting OCCER", kind=spec.kind, rows=train.n_rows, features=m)

    def fit_feature(i: int) -> Tuple[regression.FittedRegressor, float]:
        inputs = np.delete(Z, i, axis=1)
        model = regression.fit(_feature_spec(spec, i), inputs, Z[:, i])
        return model, regression.training_rmse(model, inputs, Z[:, i])

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as executor:
            fitted = list(executor.map(fit_feature, range(m)))
    else:
        fitted = [fit_feature(i) for i in range(m)]

    regressors = [model for model, _ in fitted]
    rmses = [rmse for _, rmse in fitted]
    for i, rmse in enumerate(rmses):
        logger.debug("Fitted regressor", feature=train.feature_names[i], rmse=rmse)

    model = OccerModel(normalizer, regressors, rmses, spec, feature_names=train.feature_names)
    return model.with_training_scores(_score_normalized(model, Z))


def _errors_normalized(model: OccerModel, Z: np.ndarray) -> np.ndarray:
    errors = np.empty((Z.shape[0], len(model.active_indices)))
    for column, i in enumerate(model.active_indices):
        predicted = model.regressors[i].predict(np.delete(Z, i, axis=1))
        errors[:, column] = np.abs(predicted - Z[:, i])
    return errors


def _score_normalized(model: OccerModel, Z: np.ndarray) -> np.ndarray:
    if Z.shape[0] == 0:
        return np.empty(0)
    return _errors_normalized(model, Z).mean(axis=1)


def _normalize_rows(model: OccerModel, X: np.ndarray) -> np.ndarray:
    if X.ndim != 2 or X.shape[1] != model.n_features:
        width = X.shape[-1] if X.ndim else 0
        raise DataError(f"Model expects {model.n_features} features, got {width}")
    if not np.isfinite(X).all():
        raise DataError("Input contains non-finite values")
    return normalize_matrix(model.normalizer, X)


def feature_errors(model: OccerModel, data: Dataset) -> np.ndarray:
    """Per-row absolute errors of each active regressor (n x |active|)."""
    return _errors_normalized(model, _normalize_rows(model, data.features))


def score_point(model: OccerModel, point) -> float:
    """
    Outlier score of one raw point.

    The point is normalized with the training statistics, then each active
    regressor ``i`` predicts feature ``i`` from the others; the score is the
    mean absolute difference.

    Raises:
        DataError: If the point has the wrong length or non-finite values
    """
    X = np.asarray(point, dtype=np.float64)
    if X.ndim != 1:
        raise DataError(f"A point must be a 1-D vector, got {X.ndim}-D")
    return float(_score_normalized(model, _normalize_rows(model, X[None, :]))[0])


def score_dataset(model: OccerModel, data: Dataset) -> np.ndarray:
    """Outlier score of every row of ``data``; empty input gives an empty vector."""
    return _score_normalized(model, _normalize_rows(model, data.features))


def active_count(m: int, keep_fraction: float) -> int:
    """Number of regressors kept: ``max(1, floor(keep_fraction * m))``."""
    # the epsilon absorbs binary rounding in products like 0.7 * 10
    return max(1, math.floor(keep_fraction * m + 1e-9))


def prune(model: OccerModel, keep_fraction: float) -> OccerModel:
    """
    Keep the regressors with the lowest training RMSE.

    Ties are broken by lower feature index. Regressors and RMSEs are shared,
    so pruning again with 1.0 restores the full ensemble.

    Raises:
        ConfigError: If keep_fraction is outside (0, 1]
    """
    if not 0.0 < keep_fraction <= 1.0:
        raise ConfigError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    k = active_count(model.n_features, keep_fraction)
    ranked = sorted(range(model.n_features), key=lambda i: (model.training_rmses[i], i))
    return model.with_active(sorted(ranked[:k]))


def threshold_from_training(model, quantile: float) -> float:
    """``quantile`` of the stored training scores."""
    if model.training_scores is None or len(model.training_scores) == 0:
        raise ModelError("Model has no stored training scores")
    if not 0.0 <= quantile <= 1.0:
        raise ConfigError(f"Quantile must be in [0, 1], got {quantile}")
    return float(np.quantile(model.training_scores, quantile))
