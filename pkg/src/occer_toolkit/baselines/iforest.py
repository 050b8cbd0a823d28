"""Isolation Forest: anomaly score from the expected isolation path length."""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

import numpy as np

from ..errors import DataError, ModelError
from ..regression.rng import make_generator

EULER_GAMMA = 0.5772156649015329
LEAF = -1


def average_path_length(n) -> np.ndarray:
    """Expected path length c(n) of an unsuccessful BST search over n points."""
    n = np.asarray(n, dtype=np.float64)
    safe = np.maximum(n, 3.0)
    general = 2.0 * (np.log(safe - 1.0) + EULER_GAMMA) - 2.0 * (safe - 1.0) / safe
    return np.where(n > 2, general, np.where(n == 2, 1.0, 0.0))


@dataclass(frozen=True, eq=False)
class IsolationTree:
    """Array-encoded isolation tree; rows with ``x[feature] < threshold`` go left."""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    size: np.ndarray
    depth: np.ndarray

    @property
    def max_depth(self) -> int:
        return int(self.depth.max())

    def path_lengths(self, X: np.ndarray) -> np.ndarray:
        """Leaf depth plus c(leaf size) for each row."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        rows = np.arange(X.shape[0])
        while rows.size:
            feat = self.feature[node[rows]]
            internal = feat != LEAF
            rows, feat = rows[internal], feat[internal]
            if not rows.size:
                break
            current = node[rows]
            go_left = X[rows, feat] < self.threshold[current]
            node[rows] = np.where(go_left, self.left[current], self.right[current])
        return self.depth[node] + average_path_length(self.size[node])

    def to_dict(self) -> Dict[str, List[Any]]:
        return {name: getattr(self, name).tolist()
                for name in ("feature", "threshold", "left", "right", "size", "depth")}

    @classmethod
    def from_dict(cls, data: Dict[str, List[Any]]) -> "IsolationTree":
        return cls(
            feature=np.asarray(data["feature"], dtype=np.intp),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.intp),
            right=np.asarray(data["right"], dtype=np.intp),
            size=np.asarray(data["size"], dtype=np.intp),
            depth=np.asarray(data["depth"], dtype=np.float64),
        )


def build_isolation_tree(X: np.ndarray, height_limit: int, rng: np.random.Generator) -> IsolationTree:
    """Random splits until a node is isolated, constant, or at ``height_limit``."""
    feature: List[int] = []
    threshold: List[float] = []
    left: List[int] = []
    right: List[int] = []
    size: List[int] = []
    depth: List[int] = []

    def new_node(rows: np.ndarray, level: int) -> int:
        feature.append(LEAF)
        threshold.append(0.0)
        left.append(LEAF)
        right.append(LEAF)
        size.append(rows.size)
        depth.append(level)
        return len(feature) - 1

    stack = [(new_node(np.arange(X.shape[0]), 0), np.arange(X.shape[0]), 0)]
    while stack:
        node, rows, level = stack.pop()
        if level >= height_limit or rows.size <= 1:
            continue
        values = X[rows]
        low, high = values.min(axis=0), values.max(axis=0)
        splittable = np.flatnonzero(high > low)
        if not splittable.size:
            continue

        feat = int(rng.choice(splittable))
        thr = float(rng.uniform(low[feat], high[feat]))
        goes_left = values[:, feat] < thr
        if goes_left.all() or not goes_left.any():
            continue

        feature[node], threshold[node] = feat, thr
        left[node] = new_node(rows[goes_left], level + 1)
        right[node] = new_node(rows[~goes_left], level + 1)
        stack.append((right[node], rows[~goes_left], level + 1))
        stack.append((left[node], rows[goes_left], level + 1))

    return IsolationTree(
        feature=np.asarray(feature, dtype=np.intp),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.intp),
        right=np.asarray(right, dtype=np.intp),
        size=np.asarray(size, dtype=np.intp),
        depth=np.asarray(depth, dtype=np.float64),
    )


class IsolationForestModel:
    """Isolation trees grown on seeded subsamples of the normalized training data."""

    kind = "iforest"

    def __init__(
        self,
        trees: Sequence[IsolationTree],
        subsample_size: int,
        n_features: int,
        seed: int = 0,
    ):
        if not trees:
            raise ModelError("An isolation forest needs at least one tree")
        if subsample_size < 2:
            raise ModelError(f"subsample_size must be at least 2, got {subsample_size}")
        self.trees = tuple(trees)
        self.subsample_size = subsample_size
        self.n_features = n_features
        self.seed = seed

    @property
    def n_trees(self) -> int:
        return len(self.trees)

    def scores(self, X: np.ndarray) -> np.ndarray:
        """``2 ** (-E[h(x)] / c(subsample_size))``; higher is more anomalous."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            width = X.shape[-1] if X.ndim else 0
            raise DataError(f"Isolation forest expects {self.n_features} features, got {width}")
        if X.shape[0] == 0:
            return np.empty(0)
        mean_path = np.mean([tree.path_lengths(X) for tree in self.trees], axis=0)
        return np.power(2.0, -mean_path / float(average_path_length(self.subsample_size)))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subsample_size": self.subsample_size,
            "n_features": self.n_features,
            "seed": self.seed,
            "trees": [tree.to_dict() for tree in self.trees],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IsolationForestModel":
        return cls(
            trees=[IsolationTree.from_dict(t) for t in data["trees"]],
            subsample_size=int(data["subsample_size"]),
            n_features=int(data["n_features"]),
            seed=int(data["seed"]),
        )


def fit_iforest(
    X: np.ndarray,
    n_trees: int = 100,
    subsample_size: int = 256,
    seed: int = 0,
    n_jobs: int = 1,
) -> IsolationForestModel:
    """
    Grow ``n_trees`` isolation trees on subsamples drawn without replacement.

    The subsample is ``min(subsample_size, n)`` rows and trees stop at depth
    ``ceil(log2(subsample))``. Tree ``t`` uses the random stream ``(seed, t)``.

    Raises:
        DataError: If fewer than 2 training rows are given
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise DataError("Isolation forest needs at least 2 training rows")
    if n_trees < 1:
        raise DataError(f"n_trees must be positive, got {n_trees}")
    psi = min(subsample_size, X.shape[0])
    height_limit = math.ceil(math.log2(psi))

    def grow(index: int) -> IsolationTree:
        rng = make_generator(seed, index)
        rows = rng.choice(X.shape[0], size=psi, replace=False)
        return build_isolation_tree(X[rows], height_limit, rng)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as executor:
            trees = list(executor.map(grow, range(n_trees)))
    else:
        trees = [grow(index) for index in range(n_trees)]
    return IsolationForestModel(trees, psi, X.shape[1], seed)


def iforest_score(model: IsolationForestModel, point) -> float:
    """Anomaly score of one point, in (0, 1)."""
    point = np.asarray(point, dtype=np.float64)
    if point.ndim != 1:
        raise DataError(f"A point must be a 1-D vector, got {point.ndim}-D")
    return float(model.scores(point[None, :])[0])
