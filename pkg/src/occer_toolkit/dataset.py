"""Dataset representation and z-score normalization."""

from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from .errors import DataError

TARGET = "target"
OUTLIER = "outlier"


def _readonly(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _as_matrix(values) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim != 2:
        raise DataError(f"Feature matrix must be 2-D, got {array.ndim}-D")
    if array.shape[1] < 2:
        raise DataError(f"At least 2 features are required, got {array.shape[1]}")
    if not np.isfinite(array).all():
        row, col = np.argwhere(~np.isfinite(array))[0]
        raise DataError(
            f"Non-finite value at row {row + 1}, column {col + 1}",
            row=int(row) + 1, column=int(col) + 1,
        )
    return _readonly(array)


def _as_labels(values) -> Optional[np.ndarray]:
    if values is None:
        return None
    array = np.asarray(values)
    if array.dtype.kind in {"U", "S", "O"}:
        unknown = set(array.tolist()) - {TARGET, OUTLIER}
        if unknown:
            raise DataError(f"Labels must be '{TARGET}' or '{OUTLIER}', got {sorted(map(str, unknown))[:3]}")
        array = array == OUTLIER
    return _readonly(np.array(array, dtype=bool).reshape(-1))


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with optional target/outlier labels.

    ``labels`` is a boolean vector where ``True`` marks an outlier row. Arrays
    are copied and made read-only on construction.
    """
    features: np.ndarray
    labels: Optional[np.ndarray] = None
    feature_names: Tuple[str, ...] = ()
    name: str = "dataset"

    def __post_init__(self):
        features = _as_matrix(self.features)
        labels = _as_labels(self.labels)
        n, m = features.shape
        if labels is not None and labels.shape[0] != n:
            raise DataError(f"Got {labels.shape[0]} labels for {n} rows")
        names = tuple(str(name) for name in self.feature_names)
        if not names:
            names = tuple(f"x{i + 1}" for i in range(m))
        elif len(names) != m:
            raise DataError(f"Got {len(names)} feature names for {m} columns")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "feature_names", names)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    @property
    def has_labels(self) -> bool:
        return self.labels is not None

    @property
    def outlier_count(self) -> int:
        return int(self.labels.sum()) if self.labels is not None else 0

    @property
    def target_count(self) -> int:
        return self.n_rows - self.outlier_count if self.labels is not None else self.n_rows

    def subset(self, rows: Sequence[int]) -> "Dataset":
        """Rows ``rows`` in the given order, keeping names and labels."""
        index = np.asarray(rows, dtype=np.intp)
        return replace(
            self,
            features=self.features[index],
            labels=None if self.labels is None else self.labels[index],
        )

    def target_rows(self) -> "Dataset":
        """Only the target-class rows; unlabeled data is returned unchanged."""
        if self.labels is None:
            return self
        return self.subset(np.flatnonzero(~self.labels))

    def with_features(self, features: np.ndarray) -> "Dataset":
        """Same rows, labels and names with a replacement feature matrix."""
        return Dataset(
            features=features, labels=self.labels,
            feature_names=self.feature_names, name=self.name,
        )


class NormalizationParams(BaseModel):
    """Per-feature mean and standard deviation learned from training data."""
    model_config = ConfigDict(frozen=True)

    means: Tuple[float, ...]
    stds: Tuple[float, ...]
    constant_feature_mask: Tuple[bool, ...]

    @model_validator(mode="after")
    def consistent(self):
        if not len(self.means) == len(self.stds) == len(self.constant_feature_mask):
            raise ValueError("Normalization vectors must have equal length")
        for i, (std, constant) in enumerate(zip(self.stds, self.constant_feature_mask)):
            if constant and std != 1.0:
                raise ValueError(f"Constant feature {i} must store std 1")
            if not constant and not std > 0.0:
                raise ValueError(f"Feature {i} has non-positive std {std}")
        return self

    @property
    def n_features(self) -> int:
        return len(self.means)


def fit_normalizer(train: Dataset) -> NormalizationParams:
    """Learn z-score parameters from ``train``.

    Standard deviations use the population divisor n. Constant columns are
    flagged and stored with std 1 so they normalize to 0.

    Raises:
        DataError: If the training set has fewer than 2 rows
    """
    if train.n_rows < 2:
        raise DataError(f"Normalization needs at least 2 rows, got {train.n_rows}")

    X = train.features
    means = X.mean(axis=0)
    constant = X.max(axis=0) == X.min(axis=0)
    stds = np.where(constant, 1.0, X.std(axis=0))

    return NormalizationParams(
        means=tuple(float(v) for v in means),
        stds=tuple(float(v) for v in stds),
        constant_feature_mask=tuple(bool(v) for v in constant),
    )


def normalize_matrix(params: NormalizationParams, X: np.ndarray) -> np.ndarray:
    """z-score a raw matrix; constant training columns become 0."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.n_features:
        width = X.shape[-1] if X.ndim else 0
        raise DataError(f"Expected {params.n_features} columns, got {width}")
    Z = (X - np.asarray(params.means)) / np.asarray(params.stds)
    Z[:, np.asarray(params.constant_feature_mask, dtype=bool)] = 0.0
    return Z


def apply_normalizer(params: NormalizationParams, data: Dataset) -> Dataset:
    """Normalize ``data`` with training statistics; labels pass through."""
    return data.with_features(normalize_matrix(params, data.features))


def invert_normalizer(params: NormalizationParams, data: Dataset) -> Dataset:
    """Map z-scores back to raw units; constant columns return their mean."""
    if data.n_features != params.n_features:
        raise DataError(f"Expected {params.n_features} columns, got {data.n_features}")
    X = data.features * np.asarray(params.stds) + np.asarray(params.means)
    return data.with_features(X)
