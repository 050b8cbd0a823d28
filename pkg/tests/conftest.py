"""Shared fixtures for the OCCER toolkit test suite."""

from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pytest

from occer_toolkit.dataset import Dataset

# Four features, three target rows; small enough to check the algebra by hand.
WORKED_EXAMPLE = np.array([
    [0.85, 0.34, 0.87, 0.45],
    [0.67, 0.43, 0.43, 0.54],
    [0.79, 0.89, 0.63, 0.71],
])


def make_linear_manifold(
    n_target: int = 1000,
    n_outlier: int = 100,
    m: int = 8,
    noise: float = 0.01,
    seed: int = 0,
    latent_dim: int = 2,
) -> Dataset:
    """Targets on a noisy linear subspace, outliers uniform over the targets' bounding box."""
    rng = np.random.default_rng(seed)
    mixing = rng.normal(size=(latent_dim, m))
    latent = rng.uniform(-1.0, 1.0, size=(n_target, latent_dim))
    target = latent @ mixing + rng.normal(scale=noise, size=(n_target, m))
    low, high = target.min(axis=0), target.max(axis=0)
    outlier = rng.uniform(low, high, size=(n_outlier, m))
    features = np.vstack([target, outlier])
    labels = np.r_[np.zeros(n_target, dtype=bool), np.ones(n_outlier, dtype=bool)]
    return Dataset(features=features, labels=labels, name="manifold")


def write_csv(
    path: Path,
    rows: np.ndarray,
    labels: Optional[Sequence[str]] = None,
    header: bool = True,
    names: Optional[Sequence[str]] = None,
) -> Path:
    """Write a feature matrix, with an optional trailing ``class`` column."""
    rows = np.asarray(rows, dtype=np.float64)
    names = list(names or [f"x{i + 1}" for i in range(rows.shape[1])])
    lines = []
    if header:
        lines.append(",".join(names + (["class"] if labels is not None else [])))
    for i, row in enumerate(rows):
        cells = [repr(float(v)) for v in row]
        if labels is not None:
            cells.append(str(labels[i]))
        lines.append(",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def worked_example() -> Dataset:
    return Dataset(features=WORKED_EXAMPLE, name="worked")


@pytest.fixture
def manifold() -> Dataset:
    return make_linear_manifold(n_target=200, n_outlier=20, m=6, seed=7)


@pytest.fixture
def labeled_csv(tmp_path) -> Path:
    """Labeled CSV: 60 target rows on a plane, 8 far outliers, class tags t/o."""
    data = make_linear_manifold(n_target=60, n_outlier=8, m=4, seed=3)
    labels = ["o" if flag else "t" for flag in data.labels]
    return write_csv(tmp_path / "labeled.csv", data.features, labels)


@pytest.fixture
def target_csv(tmp_path) -> Path:
    """Unlabeled CSV of target rows only."""
    data = make_linear_manifold(n_target=40, n_outlier=0, m=4, seed=5)
    return write_csv(tmp_path / "target.csv", data.features)
