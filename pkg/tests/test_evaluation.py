"""Tests for ROC-AUC, fold plans and cross-validation."""

from dataclasses import dataclass
from typing import List

import numpy as np
import pytest
from pydantic import ValidationError

from conftest import make_linear_manifold
from occer_toolkit.config import RegressorSpec
from occer_toolkit.dataset import Dataset
from occer_toolkit.detectors import OccerDetector
from occer_toolkit.errors import DataError, FoldError
from occer_toolkit.evaluation import EvalReport, make_fold_plan, roc_auc, run_cv


def brute_force_auc(scores, outlier):
    pos = scores[outlier]
    neg = scores[~outlier]
    wins = float((pos[:, None] > neg[None, :]).sum()) + 0.5 * float((pos[:, None] == neg[None, :]).sum())
    return wins / (len(pos) * len(neg))


class TestRocAuc:

    def test_perfect_separation(self):
        assert roc_auc([1, 2, 3, 4], [0, 0, 1, 1]) == 1.0

    def test_all_ties(self):
        assert roc_auc([5, 5, 5, 5], [0, 1, 0, 1]) == 0.5

    def test_interleaved(self):
        scores = np.array([1.0, 3.0, 2.0, 4.0])
        labels = np.array([False, False, True, True])
        assert roc_auc(scores, labels) == 0.75
        assert brute_force_auc(scores, labels) == 0.75

    def test_string_labels(self):
        assert roc_auc([1, 2], ["target", "outlier"]) == 1.0

    def test_matches_pair_counting(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            n = int(rng.integers(2, 201))
            outlier = rng.random(n) < rng.uniform(0.05, 0.95)
            outlier[0], outlier[1] = True, False
            # coarse rounding injects ties
            scores = np.round(rng.normal(size=n), int(rng.integers(0, 3)))
            assert roc_auc(scores, outlier) == brute_force_auc(scores, outlier)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(1)
        scores = rng.normal(size=100)
        labels = rng.random(100) < 0.3
        assert roc_auc(np.exp(scores), labels) == roc_auc(scores, labels)

    def test_negation_complements(self):
        rng = np.random.default_rng(2)
        scores = np.round(rng.normal(size=150), 1)
        labels = rng.random(150) < 0.2
        assert roc_auc(scores, labels) + roc_auc(-scores, labels) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("scores, labels", [
        ([1, 2, 3], [0, 0, 0]),
        ([1, 2, 3], [1, 1, 1]),
        ([1, 2], [0, 1, 1]),
        ([1, np.nan], [0, 1]),
    ])
    def test_invalid_input(self, scores, labels):
        with pytest.raises(DataError):
            roc_auc(scores, labels)


class TestFoldPlan:

    @pytest.fixture
    def data(self):
        labels = np.r_[np.zeros(100, dtype=bool), np.ones(10, dtype=bool)]
        return Dataset(features=np.random.default_rng(0).normal(size=(110, 3)), labels=labels)

    def test_shape(self, data):
        plan = make_fold_plan(data, seed=0)
        assert len(plan.repetitions) == 5
        assert all(len(rep) == 2 for rep in plan.repetitions)
        assert len(plan.folds) == 10

    def test_folds_partition_rows(self, data):
        for repetition in make_fold_plan(data, seed=3).repetitions:
            tests = [set(fold.test) for fold in repetition]
            assert tests[0].isdisjoint(tests[1])
            assert tests[0] | tests[1] == set(range(110))
            for fold in repetition:
                assert set(fold.train).isdisjoint(fold.test)
                assert set(fold.train) | set(fold.test) == set(range(110))

    def test_stratified(self, data):
        for fold in make_fold_plan(data, seed=1).folds:
            test_labels = data.labels[list(fold.test)]
            assert abs(int((~test_labels).sum()) - 50) <= 1
            assert abs(int(test_labels.sum()) - 5) <= 1

    def test_deterministic(self, data):
        assert make_fold_plan(data, seed=7) == make_fold_plan(data, seed=7)
        assert make_fold_plan(data, seed=7) != make_fold_plan(data, seed=8)

    def test_repetitions_differ(self, data):
        plan = make_fold_plan(data, seed=0)
        assert plan.repetitions[0][0].test != plan.repetitions[1][0].test

    def test_unlabeled_rejected(self):
        with pytest.raises(DataError):
            make_fold_plan(Dataset(features=np.eye(4)), seed=0)

    def test_small_class_rejected(self):
        data = Dataset(features=np.random.default_rng(0).normal(size=(6, 2)), labels=[0, 0, 0, 0, 0, 1])
        with pytest.raises(DataError):
            make_fold_plan(data, seed=0)


@dataclass
class RecordingDetector:
    """Wraps a detector and records what each fit sees."""
    inner: OccerDetector
    name: str = "recording"

    def __post_init__(self):
        self.train_sets: List[Dataset] = []
        self.models = []

    def fit(self, train):
        self.train_sets.append(train)
        model = self.inner.fit(train)
        self.models.append(model)
        return model


@dataclass
class RandomDetector:
    seed: int = 0
    name: str = "random"

    def fit(self, train):
        return RandomModel(np.random.default_rng(self.seed + len(train.features)))


class RandomModel:
    def __init__(self, rng):
        self.rng = rng

    def score_dataset(self, data):
        return self.rng.random(data.n_rows)


class FailingDetector:
    name = "failing"

    def fit(self, train):
        raise DataError("boom")


class TestRunCv:

    @pytest.fixture
    def data(self):
        return make_linear_manifold(n_target=200, n_outlier=20, m=5, seed=11)

    def test_trains_on_target_rows_only(self, data):
        detector = RecordingDetector(OccerDetector("occer-ridge", RegressorSpec(alpha=0.01)))
        run_cv(data, detector, seed=0)
        assert len(detector.train_sets) == 10
        for train in detector.train_sets:
            assert train.outlier_count == 0
            assert train.n_rows in (100, 101, 99)

    def test_no_test_rows_in_training(self, data):
        detector = RecordingDetector(OccerDetector("occer-ridge", RegressorSpec(alpha=0.01)))
        plan = make_fold_plan(data, seed=0)
        run_cv(data, detector, seed=0, plan=plan)
        for fold, train in zip(plan.folds, detector.train_sets):
            test_rows = {tuple(row) for row in data.features[list(fold.test)]}
            assert all(tuple(row) not in test_rows for row in train.features)

    def test_normalizer_refit_per_fold(self, data):
        detector = RecordingDetector(OccerDetector("occer-ridge", RegressorSpec(alpha=0.01)))
        run_cv(data, detector, seed=0)
        for train, model in zip(detector.train_sets, detector.models):
            np.testing.assert_allclose(model.normalizer.means, train.features.mean(axis=0), atol=1e-12)
        assert len({model.normalizer.means for model in detector.models}) == 10

    def test_report(self, data):
        report = run_cv(data, OccerDetector("occer-ridge", RegressorSpec(alpha=0.01)), seed=0)
        assert report.dataset == "manifold"
        assert report.method == "occer-ridge"
        assert len(report.fold_aucs) == 10
        assert report.mean_auc == np.mean(report.fold_aucs)
        assert report.config["seed"] == 0

    def test_reproducible(self, data):
        detector = OccerDetector("occer-ridge", RegressorSpec(alpha=0.01))
        assert run_cv(data, detector, seed=4).fold_aucs == run_cv(data, detector, seed=4).fold_aucs

    def test_workers_keep_fold_order(self, data):
        detector = OccerDetector("occer-ridge", RegressorSpec(alpha=0.01))
        assert run_cv(data, detector, seed=2, workers=4).fold_aucs == run_cv(data, detector, seed=2).fold_aucs

    def test_random_scores_near_half(self):
        data = make_linear_manifold(n_target=500, n_outlier=50, m=3, seed=0)
        report = run_cv(data, RandomDetector(), seed=0)
        assert abs(report.mean_auc - 0.5) < 0.1

    def test_failure_carries_fold_context(self, data):
        with pytest.raises(FoldError) as info:
            run_cv(data, FailingDetector(), seed=0)
        assert info.value.repetition == 0
        assert info.value.fold == 0
        assert "boom" in str(info.value)

    def test_unlabeled_data(self):
        with pytest.raises(DataError):
            run_cv(Dataset(features=np.eye(5)), FailingDetector(), seed=0)


class TestPlantedAnomalies:
    """Linear-manifold data: 1000 targets, 100 outliers, 8 features, noise 0.01."""

    @pytest.fixture(scope="class")
    def data(self):
        return make_linear_manifold(n_target=1000, n_outlier=100, m=8, noise=0.01, seed=0)

    def test_ridge_separates(self, data):
        report = run_cv(data, OccerDetector("occer-ridge", RegressorSpec(kind="ridge")), seed=0)
        assert report.mean_auc > 0.95

    @pytest.mark.slow
    def test_forest_separates(self, data):
        report = run_cv(data, OccerDetector("occer-rf", RegressorSpec(kind="random_forest")), seed=0)
        assert report.mean_auc > 0.90


class TestEvalReport:

    def test_mean_must_match(self):
        with pytest.raises(ValidationError):
            EvalReport(dataset="d", method="m", fold_aucs=[0.5, 1.0], mean_auc=0.7)

    def test_auc_range(self):
        with pytest.raises(ValidationError):
            EvalReport.from_folds("d", "m", [0.5, 1.2])

    def test_fold_rows(self):
        report = EvalReport.from_folds("d", "m", [0.5, 1.0])
        assert report.mean_auc == 0.75
        assert report.fold_rows() == [
            {"dataset": "d", "method": "m", "fold": 0, "auc": 0.5},
            {"dataset": "d", "method": "m", "fold": 1, "auc": 1.0},
        ]
