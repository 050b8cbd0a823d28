"""OCCER toolkit: one-class outlier detection with ensembles of regression models."""

__version__ = "0.1.0"
__author__ = "OCCER Toolkit Team"
__description__ = "One-class classification by per-feature regression ensembles, with LOF and isolation forest baselines"

from .config import METHODS, BenchConfig, RegressorSpec, RunConfig

from .errors import ConfigError, DataError, FoldError, ModelError, OccerError
from .dataset import Dataset, NormalizationParams, apply_normalizer, fit_normalizer, invert_normalizer
from .loaders import get_dataset_info, load_dataset
from .occer import (
    OccerModel,
    feature_errors,
    fit_occer,
    prune,
    score_dataset,
    score_point,
    threshold_from_training,
)
from .baselines import fit_iforest, fit_lof, iforest_score, lof_score
from .detectors import build_detector
from .evaluation import EvalReport, FoldPlan, make_fold_plan, roc_auc, run_cv
from .persistence import load_model, save_model

__all__ = [
    # Configuration
    'METHODS',
    'RegressorSpec',
    'RunConfig',
    'BenchConfig',

    # Errors
    'OccerError',
    'ConfigError',
    'DataError',
    'ModelError',
    'FoldError',

    # Data
    'Dataset',
    'NormalizationParams',
    'fit_normalizer',
    'apply_normalizer',
    'invert_normalizer',
    'load_dataset',
    'get_dataset_info',

    # OCCER
    'OccerModel',
    'fit_occer',
    'score_point',
    'score_dataset',
    'feature_errors',
    'prune',
    'threshold_from_training',

    # Baselines
    'fit_lof',
    'lof_score',
    'fit_iforest',
    'iforest_score',

    # Evaluation
    'build_detector',
    'roc_auc',
    'FoldPlan',
    'make_fold_plan',
    'run_cv',
    'EvalReport',

    # Persistence
    'save_model',
    'load_model',
]
