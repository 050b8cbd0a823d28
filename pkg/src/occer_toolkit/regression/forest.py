"""CART regression trees and bagged random forests."""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from .rng import make_generator

logger = logging.getLogger(__name__)

LEAF = -1


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """Array-encoded binary tree.

    Node ``i`` is a leaf when ``feature[i] == LEAF``; otherwise rows with
    ``x[feature[i]] <= threshold[i]`` go to ``left[i]`` and the rest to
    ``right[i]``. ``value[i]`` is the mean training target of the node.
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(X.shape[0], dtype=np.intp)
        rows = np.arange(X.shape[0])
        while rows.size:
            feat = self.feature[node[rows]]
            internal = feat != LEAF
            rows, feat = rows[internal], feat[internal]
            if not rows.size:
                break
            current = node[rows]
            go_left = X[rows, feat] <= self.threshold[current]
            node[rows] = np.where(go_left, self.left[current], self.right[current])
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> Dict[str, List[Any]]:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, List[Any]]) -> "RegressionTree":
        return cls(
            feature=np.asarray(data["feature"], dtype=np.intp),
            threshold=np.asarray(data["threshold"], dtype=np.float64),
            left=np.asarray(data["left"], dtype=np.intp),
            right=np.asarray(data["right"], dtype=np.intp),
            value=np.asarray(data["value"], dtype=np.float64),
        )


def _leaf_values(targets: np.ndarray, starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    means = np.add.reduceat(targets, starts) / lengths
    # clip guards against the mean rounding past the extreme targets
    return np.clip(means, np.minimum.reduceat(targets, starts), np.maximum.reduceat(targets, starts))


def _split_impurity(
    xs: np.ndarray,
    ys: np.ndarray,
    starts: np.ndarray,
    lengths: np.ndarray,
    segment: np.ndarray,
    min_samples_leaf: int,
) -> np.ndarray:
    """Summed child squared error for a split after each sorted position.

    ``xs`` and ``ys`` hold one column per feature, with the rows of each node
    contiguous and sorted by that feature. Entry ``(k, j)`` scores sending
    positions up to ``k`` of the node left; invalid splits are ``inf``.
    """
    n, p = ys.shape
    csum = np.cumsum(ys, axis=0)
    csq = np.cumsum(ys * ys, axis=0)
    padded_sum = np.vstack([np.zeros((1, p)), csum])
    padded_sq = np.vstack([np.zeros((1, p)), csq])

    sum_left = csum - padded_sum[starts][segment]
    sq_left = csq - padded_sq[starts][segment]
    sum_total = (padded_sum[starts + lengths] - padded_sum[starts])[segment]
    sq_total = (padded_sq[starts + lengths] - padded_sq[starts])[segment]

    n_left = (np.arange(n) - starts[segment] + 1).astype(np.float64)[:, None]
    n_right = lengths[segment].astype(np.float64)[:, None] - n_left
    sum_right = sum_total - sum_left
    sq_right = sq_total - sq_left
    with np.errstate(divide="ignore", invalid="ignore"):
        impurity = (sq_left - sum_left ** 2 / n_left) + (sq_right - sum_right ** 2 / n_right)

    # splits fall between distinct values; the last row of a node has n_right == 0
    following = np.vstack([xs[1:], xs[-1:]])
    valid = (following > xs) & (n_left >= min_samples_leaf) & (n_right >= min_samples_leaf)
    return np.where(valid, impurity, np.inf)


def build_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_features: int,
    min_samples_leaf: int = 1,
    max_depth: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> RegressionTree:
    """Grow a CART regression tree on all rows of ``X``.

    The tree grows one depth level at a time. Columns are sorted once; every
    level regroups the sorted rows by node, so all nodes of a level are split
    with the same array operations.

    Each split minimizes the summed child squared error. Ties go to the lowest
    feature index, then the lowest threshold; thresholds are midpoints between
    consecutive distinct values. When ``max_features`` is below the column
    count, each node draws that many candidates from ``rng`` without
    replacement, nodes taken in creation order.
    """
    n, p = X.shape
    columns = np.arange(p)
    capacity = 2 * n + 1
    feature = np.full(capacity, LEAF, dtype=np.intp)
    threshold = np.zeros(capacity)
    left = np.full(capacity, LEAF, dtype=np.intp)
    right = np.full(capacity, LEAF, dtype=np.intp)
    value = np.zeros(capacity)
    value[0] = _leaf_values(y, np.array([0]), np.array([n]))[0]
    node_count = 1

    node_of = np.zeros(n, dtype=np.intp)
    # row indices per column, grouped by node and sorted by that column within a node
    grouped = np.argsort(X, axis=0, kind="stable")
    depth = 0
    while grouped.shape[0] and (max_depth is None or depth < max_depth):
        size = grouped.shape[0]
        row_nodes = node_of[grouped[:, 0]]
        boundary = np.r_[True, row_nodes[1:] != row_nodes[:-1]]
        starts = np.flatnonzero(boundary)
        lengths = np.diff(np.r_[starts, size])
        segment = np.cumsum(boundary) - 1
        nodes = row_nodes[starts]

        xs = X[grouped, columns]
        ys = y[grouped]
        splittable = (lengths >= 2 * min_samples_leaf) & (
            np.maximum.reduceat(ys[:, 0], starts) > np.minimum.reduceat(ys[:, 0], starts)
        )
        if max_features < p:
            allowed = np.zeros((starts.size, p), dtype=bool)
            for s in np.flatnonzero(splittable):
                allowed[s, rng.choice(p, size=max_features, replace=False)] = True
        else:
            allowed = np.repeat(splittable[:, None], p, axis=1)

        impurity = _split_impurity(xs, ys, starts, lengths, segment, min_samples_leaf)
        impurity[~allowed[segment]] = np.inf

        per_feature = np.minimum.reduceat(impurity, starts, axis=0)
        best_feature = np.argmin(per_feature, axis=1)
        best = per_feature[np.arange(starts.size), best_feature]
        split = np.isfinite(best)
        if not split.any():
            break

        chosen = impurity[np.arange(size), best_feature[segment]]
        position = np.where(chosen == best[segment], np.arange(size), size)
        first = np.minimum.reduceat(position, starts)

        s = np.flatnonzero(split)
        f, k = best_feature[s], first[s]
        lower, upper = xs[k, f], xs[k + 1, f]
        thr = (lower + upper) / 2.0
        thr = np.where(thr >= upper, lower, thr)

        children = node_count + 2 * np.arange(s.size)
        feature[nodes[s]] = f
        threshold[nodes[s]] = thr
        left[nodes[s]] = children
        right[nodes[s]] = children + 1
        node_count += 2 * s.size

        # route rows of split nodes; rows of leaves drop out
        left_of = np.full(starts.size, LEAF, dtype=np.intp)
        right_of = np.full(starts.size, LEAF, dtype=np.intp)
        split_feature = np.zeros(starts.size, dtype=np.intp)
        split_threshold = np.zeros(starts.size)
        left_of[s], right_of[s] = children, children + 1
        split_feature[s], split_threshold[s] = f, thr
        rows = grouped[:, 0]
        goes_left = X[rows, split_feature[segment]] <= split_threshold[segment]
        node_of = np.full(n, LEAF, dtype=np.intp)
        node_of[rows] = np.where(goes_left, left_of[segment], right_of[segment])

        keep = node_of[grouped] != LEAF
        grouped = grouped.T[keep.T].reshape(p, -1).T
        grouped = np.take_along_axis(grouped, np.argsort(node_of[grouped], axis=0, kind="stable"), axis=0)

        child_rows = grouped[:, 0]
        child_nodes = node_of[child_rows]
        child_starts = np.flatnonzero(np.r_[True, child_nodes[1:] != child_nodes[:-1]])
        child_lengths = np.diff(np.r_[child_starts, child_rows.size])
        value[child_nodes[child_starts]] = _leaf_values(y[child_rows], child_starts, child_lengths)
        depth += 1

    return RegressionTree(
        feature=feature[:node_count].copy(),
        threshold=threshold[:node_count].copy(),
        left=left[:node_count].copy(),
        right=right[:node_count].copy(),
        value=value[:node_count].copy(),
    )


def fit_forest(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int,
    max_features: int,
    min_samples_leaf: int = 1,
    max_depth: Optional[int] = None,
    seed: int = 0,
    n_jobs: int = 1,
) -> List[RegressionTree]:
    """Bagged CART trees, each grown on a seeded bootstrap sample.

    Tree ``t`` draws its bootstrap rows and split candidates from the stream
    ``(seed, t)``, so the result is identical for any ``n_jobs``.
    """
    n = X.shape[0]

    def grow(index: int) -> RegressionTree:
        rng = make_generator(seed, index)
        rows = rng.integers(0, n, size=n)
        return build_tree(X[rows], y[rows], max_features, min_samples_leaf, max_depth, rng)

    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as executor:
            trees = list(executor.map(grow, range(n_trees)))
    else:
        trees = [grow(index) for index in range(n_trees)]

    logger.debug(f"Grew {n_trees} trees ({sum(t.node_count for t in trees)} nodes)")
    return trees


def predict_forest(trees: List[RegressionTree], X: np.ndarray) -> np.ndarray:
    """Mean of the tree predictions."""
    total = np.zeros(X.shape[0])
    for tree in trees:
        total += tree.predict(X)
    return total / len(trees)
