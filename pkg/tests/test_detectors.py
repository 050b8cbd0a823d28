"""Tests for method descriptors and the shared normalization path."""

import numpy as np
import pytest

from conftest import make_linear_manifold
from occer_toolkit.config import RegressorSpec, RunConfig
from occer_toolkit.dataset import Dataset, fit_normalizer
from occer_toolkit.detectors import (
    IsolationForestDetector,
    LofDetector,
    OccerDetector,
    build_detector,
    method_label,
)
from occer_toolkit.errors import ConfigError, DataError
from occer_toolkit.occer import OccerModel


@pytest.fixture
def train():
    return make_linear_manifold(n_target=80, n_outlier=0, m=4, seed=2)


def test_method_labels():
    assert method_label("occer-rf", 1.0) == "occer-rf"
    assert method_label("occer-rf", 0.25) == "occer-rf@0.25"
    assert method_label("lof", 0.5) == "lof"


def test_build_detector_per_family():
    config = RunConfig(method="occer-lasso", keep_fraction=0.5, seed=3, spec={"alpha": "0.2"})
    detector = build_detector(config)
    assert isinstance(detector, OccerDetector)
    assert detector.spec.kind == "lasso"
    assert detector.spec.alpha == 0.2
    assert detector.spec.seed == 3
    assert detector.name == "occer-lasso@0.5"

    assert isinstance(build_detector(config, "lof"), LofDetector)
    forest = build_detector(config, "iforest")
    assert isinstance(forest, IsolationForestDetector)
    assert forest.seed == 3


def test_regressor_spec_rejected_for_baselines():
    with pytest.raises(ConfigError):
        RunConfig(method="lof").regressor_spec()


def test_occer_detector_prunes(train):
    model = OccerDetector("occer-ridge@0.5", RegressorSpec(), keep_fraction=0.5).fit(train)
    assert isinstance(model, OccerModel)
    assert len(model.active_indices) == 2
    np.testing.assert_array_equal(model.training_scores, model.score_dataset(train))


@pytest.mark.parametrize("detector", [LofDetector(k=10), IsolationForestDetector(n_trees=10)])
def test_baselines_share_normalizer(train, detector):
    model = detector.fit(train)
    assert model.normalizer == fit_normalizer(train)
    assert model.training_scores.shape == (train.n_rows,)
    assert model.score_dataset(train).shape == (train.n_rows,)


def test_lof_k_clamped_to_training_size():
    small = Dataset(features=np.random.default_rng(0).normal(size=(8, 3)))
    model = LofDetector(k=20).fit(small)
    assert model.model.k == 7


def test_baselines_reject_outlier_rows():
    data = make_linear_manifold(n_target=20, n_outlier=2, m=3)
    with pytest.raises(DataError):
        LofDetector(k=5).fit(data)
    with pytest.raises(DataError):
        IsolationForestDetector(n_trees=5).fit(data)


def test_baseline_dimension_mismatch(train):
    model = LofDetector(k=5).fit(train)
    with pytest.raises(DataError):
        model.score_dataset(Dataset(features=np.zeros((2, 3))))


def test_lof_training_scores_leave_self_out(train):
    model = LofDetector(k=5).fit(train)
    np.testing.assert_array_equal(model.training_scores, model.model.training_scores)


def test_settings_describe_each_detector():
    occer = OccerDetector("occer-ridge@0.25", RegressorSpec(alpha=0.3, seed=4), keep_fraction=0.25)
    assert occer.settings()["keep_fraction"] == 0.25
    assert occer.settings()["spec"]["alpha"] == 0.3
    assert occer.settings()["spec"]["seed"] == 4
    assert LofDetector(k=7).settings() == {"k": 7}
    forest = IsolationForestDetector(n_trees=12, subsample_size=64, seed=2)
    assert forest.settings() == {"n_trees": 12, "subsample_size": 64, "seed": 2}
