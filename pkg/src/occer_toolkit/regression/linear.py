"""Linear regressors: closed-form ridge and coordinate-descent lasso/elastic net.

The intercept is never penalized; all solvers work on centered data and
recover it as ``mean(y) - mean(X) @ w``.
"""

from typing import List, NamedTuple, Tuple

import numpy as np
import scipy.linalg


class CoordinateDescentResult(NamedTuple):
    coef: np.ndarray
    intercept: float
    n_iter: int
    objectives: List[float]


def _center(X: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    return X - x_mean, y - y_mean, x_mean, y_mean


def fit_ridge(X: np.ndarray, y: np.ndarray, alpha: float) -> Tuple[np.ndarray, float]:
    """Minimize ``||y - Xw - b||^2 + alpha * ||w||^2``.

    Solves the symmetric positive-definite system ``(XcᵀXc + alpha·I) w = Xcᵀyc``
    by Cholesky. Without a penalty the minimum-norm least-squares solution is
    used, which also covers rank-deficient designs.
    """
    Xc, yc, x_mean, y_mean = _center(X, y)
    if alpha == 0.0:
        coef = scipy.linalg.lstsq(Xc, yc)[0]
        return coef, y_mean - float(x_mean @ coef)
    gram = Xc.T @ Xc + alpha * np.eye(X.shape[1])
    try:
        coef = scipy.linalg.solve(gram, Xc.T @ yc, assume_a="pos")
    except scipy.linalg.LinAlgError:
        coef = scipy.linalg.solve(gram, Xc.T @ yc, assume_a="sym")
    return coef, y_mean - float(x_mean @ coef)


def soft_threshold(rho: float, threshold: float) -> float:
    if rho > threshold:
        return rho - threshold
    if rho < -threshold:
        return rho + threshold
    return 0.0


def enet_objective(
    X: np.ndarray, y: np.ndarray, coef: np.ndarray, intercept: float,
    alpha: float, l1_ratio: float,
) -> float:
    """``½n⁻¹||y - Xw - b||² + alpha·(l1_ratio·||w||₁ + ½(1 - l1_ratio)·||w||²)``."""
    residual = y - X @ coef - intercept
    penalty = l1_ratio * np.abs(coef).sum() + 0.5 * (1.0 - l1_ratio) * float(coef @ coef)
    return 0.5 * float(residual @ residual) / X.shape[0] + alpha * penalty


def coordinate_descent(
    X: np.ndarray,
    y: np.ndarray,
    alpha: float,
    l1_ratio: float,
    tol: float = 1e-4,
    max_iter: int = 1000,
    track_objective: bool = False,
) -> CoordinateDescentResult:
    """Cyclic coordinate descent for the elastic net objective.

    Each coordinate is minimized exactly (soft-thresholding for the L1 part),
    so the objective never increases between sweeps. Stops when the largest
    coefficient change in a sweep drops below ``tol`` or after ``max_iter``
    sweeps. ``l1_ratio = 1`` is the lasso.
    """
    n, p = X.shape
    Xc, yc, x_mean, y_mean = _center(X, y)
    col_sq = (Xc ** 2).sum(axis=0) / n
    l1 = alpha * l1_ratio
    l2 = alpha * (1.0 - l1_ratio)

    coef = np.zeros(p)
    residual = yc.copy()
    objectives: List[float] = []
    if track_objective:
        objectives.append(enet_objective(Xc, yc, coef, 0.0, alpha, l1_ratio))

    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        max_change = 0.0
        for j in range(p):
            if col_sq[j] == 0.0:
                continue
            old = coef[j]
            rho = float(Xc[:, j] @ residual) / n + col_sq[j] * old
            new = soft_threshold(rho, l1) / (col_sq[j] + l2)
            if new != old:
                residual -= Xc[:, j] * (new - old)
                coef[j] = new
                max_change = max(max_change, abs(new - old))
        if track_objective:
            objectives.append(enet_objective(Xc, yc, coef, 0.0, alpha, l1_ratio))
        if max_change < tol:
            break

    return CoordinateDescentResult(coef, y_mean - float(x_mean @ coef), n_iter, objectives)
