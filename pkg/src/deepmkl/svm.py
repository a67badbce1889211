"""Soft-margin SVM over a precomputed Gram matrix.

The dual ``max sum(a) - 1/2 a^T (Y K Y) a`` subject to ``0 <= a_i <= C`` and
``y^T a = 0`` is solved by SMO: repeatedly pick the maximal violating pair and
solve the two-variable subproblem in closed form.
"""

from dataclasses import dataclass

import numpy as np
from loguru import logger

from .config import config
from .errors import NumericFailure, SvmConvergenceError

# Floor for the pairwise curvature so indefinite kernels still give a finite step.
TAU = 1e-12


@dataclass(frozen=True)
class SvmModel:
    alpha: np.ndarray
    bias: float
    sv_indices: np.ndarray
    C: float
    dual_value: float
    y: np.ndarray
    updates: int = 0

    @property
    def n_sv(self) -> int:
        return len(self.sv_indices)

    @property
    def free_indices(self) -> np.ndarray:
        """Support vectors strictly inside the box."""
        a = self.alpha[self.sv_indices]
        return self.sv_indices[a < self.C - config.sv_threshold]

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha.tolist(),
            "bias": self.bias,
            "sv_indices": self.sv_indices.tolist(),
            "C": self.C,
            "dual_value": self.dual_value,
        }


def _validate(K: np.ndarray, y: np.ndarray) -> None:
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"Gram matrix must be square, got {K.shape}")
    if y.shape != (K.shape[0],):
        raise ValueError(f"label vector of shape {y.shape} does not match Gram of shape {K.shape}")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("both classes must be present")
    if not np.all(np.isfinite(K)):
        raise NumericFailure("Gram matrix contains non-finite entries")


def _select_pair(alpha: np.ndarray, grad: np.ndarray, y: np.ndarray, C: float) -> tuple[int, int, float]:
    """Maximal violating pair; ties resolve to the lowest index."""
    score = -y * grad
    up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
    low = ((y < 0) & (alpha < C)) | ((y > 0) & (alpha > 0))
    if not up.any() or not low.any():
        return -1, -1, 0.0
    up_idx = np.flatnonzero(up)
    low_idx = np.flatnonzero(low)
    i = int(up_idx[np.argmax(score[up_idx])])
    j = int(low_idx[np.argmin(score[low_idx])])
    return i, j, float(score[i] - score[j])


def _update_pair(alpha: np.ndarray, grad: np.ndarray, Q: np.ndarray, y: np.ndarray, C: float, i: int, j: int) -> None:
    old_i, old_j = alpha[i], alpha[j]
    a_i, a_j = old_i, old_j

    if y[i] != y[j]:
        quad = max(Q[i, i] + Q[j, j] + 2 * Q[i, j], TAU)
        delta = (-grad[i] - grad[j]) / quad
        diff = a_i - a_j
        a_i += delta
        a_j += delta
        if diff > 0:
            if a_j < 0:
                a_j, a_i = 0.0, diff
        elif a_i < 0:
            a_i, a_j = 0.0, -diff
        if diff > 0:
            if a_i > C:
                a_i, a_j = C, C - diff
        elif a_j > C:
            a_j, a_i = C, C + diff
    else:
        quad = max(Q[i, i] + Q[j, j] - 2 * Q[i, j], TAU)
        delta = (grad[i] - grad[j]) / quad
        total = a_i + a_j
        a_i -= delta
        a_j += delta
        if total > C:
            if a_i > C:
                a_i, a_j = C, total - C
        elif a_j < 0:
            a_j, a_i = 0.0, total
        if total > C:
            if a_j > C:
                a_j, a_i = C, total - C
        elif a_i < 0:
            a_i, a_j = 0.0, total

    alpha[i], alpha[j] = a_i, a_j
    grad += Q[:, i] * (a_i - old_i) + Q[:, j] * (a_j - old_j)


def _bias(alpha: np.ndarray, grad: np.ndarray, y: np.ndarray, C: float) -> float:
    """Average over free vectors, else the midpoint of the feasible interval."""
    yg = y * grad
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~(at_upper | at_lower)
    if free.any():
        return -float(yg[free].mean())
    upper_side = (at_upper & (y < 0)) | (at_lower & (y > 0))
    lower_side = (at_upper & (y > 0)) | (at_lower & (y < 0))
    ub = yg[upper_side].min() if upper_side.any() else np.inf
    lb = yg[lower_side].max() if lower_side.any() else -np.inf
    return -float((ub + lb) / 2)


def dual_objective(alpha: np.ndarray, K: np.ndarray, y: np.ndarray) -> float:
    v = alpha * y
    return float(alpha.sum() - 0.5 * v @ K @ v)


def solve(
    K: np.ndarray,
    y: np.ndarray,
    C: float | None = None,
    *,
    alpha0: np.ndarray | None = None,
    tol: float | None = None,
    max_updates: int | None = None,
) -> SvmModel:
    """Solve the SVM dual on Gram ``K``.

    ``alpha0`` warm-starts the solver and must satisfy the box and equality
    constraints for the same labels and ``C``.
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    _validate(K, y)
    C = config.c_svm if C is None else float(C)
    tol = config.smo_tol if tol is None else tol
    max_updates = config.smo_max_updates if max_updates is None else max_updates

    if alpha0 is None:
        alpha = np.zeros(len(y))
    else:
        alpha = np.clip(np.array(alpha0, dtype=float), 0.0, C)
        if alpha.shape != y.shape or abs(alpha @ y) > 1e-8:
            raise ValueError("warm-start coefficients are infeasible for these labels")

    Q = np.outer(y, y) * K
    grad = Q @ alpha - 1.0

    updates = 0
    i, j, gap = _select_pair(alpha, grad, y, C)
    while gap >= tol:
        if updates >= max_updates:
            raise SvmConvergenceError(residual=gap, updates=updates)
        _update_pair(alpha, grad, Q, y, C, i, j)
        updates += 1
        i, j, gap = _select_pair(alpha, grad, y, C)

    bias = _bias(alpha, grad, y, C)
    sv_indices = np.flatnonzero(alpha > config.sv_threshold)
    dual_value = dual_objective(alpha, K, y)
    logger.debug(f"SMO converged after {updates} updates: {len(sv_indices)} SVs, dual {dual_value:.6g}")
    return SvmModel(
        alpha=alpha,
        bias=bias,
        sv_indices=sv_indices,
        C=C,
        dual_value=dual_value,
        y=y,
        updates=updates,
    )


def solve_on_support(
    K: np.ndarray,
    y: np.ndarray,
    sv: np.ndarray,
    C: float | None = None,
    *,
    at_bound: np.ndarray | None = None,
) -> SvmModel:
    """Coefficients on a frozen support set.

    Vectors listed in ``at_bound`` are held at ``C``; the free rest ``f`` lie on the margin:

        [[K_ff, 1], [1^T, 0]] (y_f * a_f; b) = (y_f - K_fb (y_b * C); -sum(y_b * C))
    """
    K = np.asarray(K, dtype=float)
    y = np.asarray(y, dtype=float)
    sv = np.asarray(sv, dtype=int)
    C = config.c_svm if C is None else float(C)
    bounded = np.intersect1d(sv, np.asarray([] if at_bound is None else at_bound, dtype=int))
    free = np.setdiff1d(sv, bounded)
    if len(free) == 0:
        raise NumericFailure("frozen support set has no free vector to fix the bias")

    n_free = len(free)
    held = y[bounded] * C
    bordered = np.ones((n_free + 1, n_free + 1))
    bordered[:n_free, :n_free] = K[np.ix_(free, free)]
    bordered[n_free, n_free] = 0.0
    rhs = np.append(y[free] - K[np.ix_(free, bounded)] @ held, -held.sum())
    try:
        solution = np.linalg.solve(bordered, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericFailure(f"bordered support-vector system is singular: {exc}") from exc

    alpha = np.zeros(len(y))
    alpha[bounded] = C
    alpha[free] = y[free] * solution[:n_free]
    if np.any(alpha[free] <= 0):
        raise NumericFailure("frozen support set yields non-positive coefficients")
    return SvmModel(
        alpha=alpha,
        bias=float(solution[n_free]),
        sv_indices=np.sort(sv),
        C=C,
        dual_value=dual_objective(alpha, K, y),
        y=y,
    )


def decision_function(model: SvmModel, K_cross: np.ndarray) -> np.ndarray:
    """Decision values for rows of ``K_cross`` (test x train, columns in training order)."""
    K_cross = np.atleast_2d(np.asarray(K_cross, dtype=float))
    if K_cross.shape[1] != len(model.alpha):
        raise ValueError(f"cross-Gram has {K_cross.shape[1]} columns, model has {len(model.alpha)} training points")
    return K_cross @ (model.alpha * model.y) + model.bias


def predict(model: SvmModel, K_cross: np.ndarray) -> np.ndarray:
    """Labels in {-1, +1}; a decision value of exactly 0 maps to +1."""
    return np.where(decision_function(model, K_cross) >= 0, 1, -1)


def dual_grad_theta(model: SvmModel, dK: np.ndarray) -> float:
    """Derivative of the dual value with respect to one kernel weight at fixed alpha."""
    dK = np.asarray(dK, dtype=float)
    if dK.shape != (len(model.alpha), len(model.alpha)):
        raise ValueError(f"derivative matrix of shape {dK.shape} does not match {len(model.alpha)} points")
    v = model.alpha * model.y
    return float(-0.5 * v @ dK @ v)
