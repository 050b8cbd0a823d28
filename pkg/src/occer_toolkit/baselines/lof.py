"""Local Outlier Factor against a fixed reference set."""

from typing import Any, Dict

import numpy as np
from scipy.spatial.distance import cdist

from ..errors import ConfigError, DataError

# Added to mean reachability distances so duplicated points keep a finite density.
_DENSITY_EPS = 1e-10


def _knn(distances: np.ndarray, k: int) -> np.ndarray:
    # stable sort keeps neighbour order deterministic under distance ties
    return np.argsort(distances, axis=1, kind="stable")[:, :k]


class LofModel:
    """Normalized training points plus their k-distances and local densities."""

    kind = "lof"

    def __init__(self, training_points: np.ndarray, k: int):
        X = np.array(training_points, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise DataError("LOF needs a non-empty 2-D training matrix")
        if not 1 <= k < X.shape[0]:
            raise ConfigError(f"LOF k must be in [1, {X.shape[0] - 1}], got {k}")
        X.setflags(write=False)
        self.training_points = X
        self.k = k

        distances = cdist(X, X)
        np.fill_diagonal(distances, np.inf)
        neighbours = _knn(distances, k)
        rows = np.arange(X.shape[0])[:, None]
        self.k_distances = distances[rows[:, 0], neighbours[:, -1]]
        reach = np.maximum(self.k_distances[neighbours], distances[rows, neighbours])
        self.lrd = 1.0 / (reach.mean(axis=1) + _DENSITY_EPS)
        # each training point scored against the others, never against itself
        self.training_scores = self.lrd[neighbours].mean(axis=1) / self.lrd

    @property
    def n_features(self) -> int:
        return self.training_points.shape[1]

    def scores(self, Q: np.ndarray) -> np.ndarray:
        """LOF of each query row: mean neighbour density over own density."""
        Q = np.asarray(Q, dtype=np.float64)
        if Q.ndim != 2 or Q.shape[1] != self.n_features:
            width = Q.shape[-1] if Q.ndim else 0
            raise DataError(f"LOF model expects {self.n_features} features, got {width}")
        if Q.shape[0] == 0:
            return np.empty(0)
        distances = cdist(Q, self.training_points)
        neighbours = _knn(distances, self.k)
        reach = np.maximum(
            self.k_distances[neighbours],
            np.take_along_axis(distances, neighbours, axis=1),
        )
        own = 1.0 / (reach.mean(axis=1) + _DENSITY_EPS)
        return self.lrd[neighbours].mean(axis=1) / own

    def to_dict(self) -> Dict[str, Any]:
        return {"k": self.k, "training_points": self.training_points.tolist()}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LofModel":
        return cls(np.asarray(data["training_points"], dtype=np.float64), int(data["k"]))


def fit_lof(X: np.ndarray, k: int = 20) -> LofModel:
    """Build a LOF model; raises ConfigError unless 1 <= k < len(X)."""
    return LofModel(X, k)


def lof_score(model: LofModel, point) -> float:
    """LOF of one point; about 1 inside uniform regions, large for isolated points."""
    point = np.asarray(point, dtype=np.float64)
    if point.ndim != 1:
        raise DataError(f"A point must be a 1-D vector, got {point.ndim}-D")
    return float(model.scores(point[None, :])[0])
