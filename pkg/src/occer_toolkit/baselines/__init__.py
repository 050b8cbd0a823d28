"""Reference outlier detectors used for comparison runs."""

from .iforest import (
    IsolationForestModel,
    IsolationTree,
    average_path_length,
    fit_iforest,
    iforest_score,
)
from .lof import LofModel, fit_lof, lof_score

__all__ = [
    "LofModel",
    "fit_lof",
    "lof_score",
    "IsolationForestModel",
    "IsolationTree",
    "average_path_length",
    "fit_iforest",
    "iforest_score",
]
