"""Single-output regressors used as OCCER base models."""

from ..config import RegressorSpec
from .models import (
    FittedRegressor,
    ForestRegressor,
    LinearRegressor,
    fit,
    predict,
    regressor_from_dict,
    training_rmse,
)

__all__ = [
    "RegressorSpec",
    "FittedRegressor",
    "LinearRegressor",
    "ForestRegressor",
    "fit",
    "predict",
    "training_rmse",
    "regressor_from_dict",
]
