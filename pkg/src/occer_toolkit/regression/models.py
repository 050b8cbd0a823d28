"""Fitted regressors and the fit/predict/rmse entry points."""

from abc import ABC, abstractmethod
from typing import Any, Dict, List

import numpy as np

from ..config import RegressorSpec
from ..errors import DataError, ModelError
from . import forest, linear


def _check_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise DataError(f"{name} must be a 2-D matrix, got {X.ndim}-D")
    if not np.isfinite(X).all():
        raise DataError(f"{name} contains non-finite values")
    return X


class FittedRegressor(ABC):
    """A trained single-output regression model.

    Instances are immutable; ``predict`` is safe for concurrent callers.
    """

    def __init__(self, spec: RegressorSpec, n_inputs: int):
        self.spec = spec
        self.n_inputs = n_inputs

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = _check_matrix(X)
        if X.shape[1] != self.n_inputs:
            raise DataError(f"Model expects {self.n_inputs} inputs, got {X.shape[1]}")
        return self._predict(X)

    @abstractmethod
    def _predict(self, X: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def parameters(self) -> Dict[str, Any]:
        """Kind-dependent payload for serialization."""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.spec.kind,
            "spec": self.spec.model_dump(mode="json"),
            "n_inputs": self.n_inputs,
            **self.parameters(),
        }


class LinearRegressor(FittedRegressor):
    """``Xw + b`` for ridge, lasso and elastic net."""

    def __init__(self, spec: RegressorSpec, coef: np.ndarray, intercept: float, n_iter: int = 0):
        coef = np.array(coef, dtype=np.float64)
        coef.setflags(write=False)
        super().__init__(spec, coef.shape[0])
        self.coef = coef
        self.intercept = float(intercept)
        self.n_iter = n_iter

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return X @ self.coef + self.intercept

    def parameters(self) -> Dict[str, Any]:
        return {"coef": self.coef.tolist(), "intercept": self.intercept}


class ForestRegressor(FittedRegressor):
    """Mean of bagged CART trees."""

    def __init__(self, spec: RegressorSpec, trees: List[forest.RegressionTree], n_inputs: int):
        if not trees:
            raise ModelError("A forest needs at least one tree")
        super().__init__(spec, n_inputs)
        self.trees = tuple(trees)

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return forest.predict_forest(self.trees, X)

    def parameters(self) -> Dict[str, Any]:
        return {"trees": [tree.to_dict() for tree in self.trees]}


def fit(spec: RegressorSpec, X, y) -> FittedRegressor:
    """
    Train a regressor described by ``spec``.

    Args:
        spec: Regressor kind and hyperparameters
        X: n x p input matrix
        y: length-n target vector

    Returns:
        Fitted regressor with input width p

    Raises:
        DataError: If n < 2, p = 0, shapes disagree, or inputs are not finite
    """
    X = _check_matrix(X)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, p = X.shape
    if n < 2:
        raise DataError(f"Regression needs at least 2 rows, got {n}")
    if p < 1:
        raise DataError("Regression needs at least one input column")
    if y.shape[0] != n:
        raise DataError(f"Got {y.shape[0]} targets for {n} rows")
    if not np.isfinite(y).all():
        raise DataError("y contains non-finite values")

    if spec.kind == "ridge":
        coef, intercept = linear.fit_ridge(X, y, spec.alpha)
        return LinearRegressor(spec, coef, intercept)
    if spec.kind in ("lasso", "elastic_net"):
        l1_ratio = 1.0 if spec.kind == "lasso" else spec.l1_ratio
        result = linear.coordinate_descent(
            X, y, spec.alpha, l1_ratio, spec.cd_tolerance, spec.cd_max_iter
        )
        return LinearRegressor(spec, result.coef, result.intercept, result.n_iter)

    trees = forest.fit_forest(
        X, y,
        n_trees=spec.n_trees,
        max_features=spec.resolve_max_features(p),
        min_samples_leaf=spec.min_samples_leaf,
        max_depth=spec.max_depth,
        seed=spec.seed,
        n_jobs=spec.n_jobs,
    )
    return ForestRegressor(spec, trees, p)


def predict(model: FittedRegressor, X) -> np.ndarray:
    """Predictions for the rows of ``X``; raises DataError on width mismatch."""
    return model.predict(X)


def training_rmse(model: FittedRegressor, X, y) -> float:
    """Root-mean-square error of ``model`` on ``(X, y)``."""
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if y.size == 0:
        raise DataError("RMSE of an empty sample is undefined")
    residual = model.predict(X) - y
    return float(np.sqrt(np.mean(residual ** 2)))


def regressor_from_dict(data: Dict[str, Any]) -> FittedRegressor:
    """Rebuild a regressor written by ``FittedRegressor.to_dict``."""
    try:
        spec = RegressorSpec(**data["spec"])
        if spec.kind == "random_forest":
            trees = [forest.RegressionTree.from_dict(t) for t in data["trees"]]
            return ForestRegressor(spec, trees, int(data["n_inputs"]))
        return LinearRegressor(spec, data["coef"], data["intercept"])
    except (KeyError, TypeError, ValueError) as e:
        raise ModelError(f"Invalid regressor payload: {e}") from e
