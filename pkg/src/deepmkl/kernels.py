"""Base kernels, in two guises.

Layer 1 evaluates a kernel on raw input vectors. Deeper layers re-apply the same
kernel family to the previous layer's normalized kernel value, substituting that
value for the dot product.
"""

from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.spatial.distance import cdist

from .data import DEFAULT_KERNELS
from .errors import NumericFailure


class KernelKind(str, Enum):
    LINEAR = "linear"
    RBF = "rbf"
    SIGMOID = "sigmoid"
    POLYNOMIAL = "polynomial"


_DEFAULTS: dict[KernelKind, dict[str, float | int]] = {
    KernelKind.LINEAR: {},
    KernelKind.RBF: {"gamma": 1.0},
    KernelKind.SIGMOID: {"alpha": -1e-4, "beta": 1.0},
    KernelKind.POLYNOMIAL: {"alpha": 1.0, "beta": 1.0, "delta": 2},
}


class KernelSpec(BaseModel):
    """A base kernel kind with its fixed hyperparameters.

    Missing hyperparameters are filled from the default roster for the kind, so
    ``{"kind": "polynomial"}`` means (alpha=1, beta=1, delta=2).
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: KernelKind
    gamma: float | None = Field(default=None, gt=0)
    alpha: float | None = None
    beta: float | None = None
    delta: int | None = Field(default=None, ge=1)

    @model_validator(mode="before")
    @classmethod
    def _fill_defaults(cls, data: Any) -> Any:
        if not isinstance(data, dict) or "kind" not in data:
            return data
        kind = KernelKind(data["kind"])
        filled = dict(_DEFAULTS[kind])
        filled.update({key: value for key, value in data.items() if value is not None})
        return filled

    def __str__(self) -> str:
        params = {
            KernelKind.LINEAR: lambda: "",
            KernelKind.RBF: lambda: f"gamma={self.gamma:g}",
            KernelKind.SIGMOID: lambda: f"alpha={self.alpha:g}, beta={self.beta:g}",
            KernelKind.POLYNOMIAL: lambda: f"alpha={self.alpha:g}, beta={self.beta:g}, delta={self.delta}",
        }[self.kind]()
        return f"{self.kind.value}({params})"

    @classmethod
    def linear(cls) -> "KernelSpec":
        return cls(kind=KernelKind.LINEAR)

    @classmethod
    def rbf(cls, gamma: float = 1.0) -> "KernelSpec":
        return cls(kind=KernelKind.RBF, gamma=gamma)

    @classmethod
    def sigmoid(cls, alpha: float = -1e-4, beta: float = 1.0) -> "KernelSpec":
        return cls(kind=KernelKind.SIGMOID, alpha=alpha, beta=beta)

    @classmethod
    def polynomial(cls, alpha: float = 1.0, beta: float = 1.0, delta: int = 2) -> "KernelSpec":
        return cls(kind=KernelKind.POLYNOMIAL, alpha=alpha, beta=beta, delta=delta)


def default_roster() -> list[KernelSpec]:
    """Linear, RBF (gamma=1), sigmoid (alpha=-1e-4, beta=1) and polynomial (alpha=1, beta=1, delta=2)."""
    return [KernelSpec(**entry) for entry in DEFAULT_KERNELS]


def _check_finite(values: np.ndarray, spec: KernelSpec, what: str) -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise NumericFailure(f"non-finite {what} value", kernel=str(spec))
    return values


def _from_dot(spec: KernelSpec, dot: np.ndarray) -> np.ndarray:
    if spec.kind == KernelKind.LINEAR:
        return dot
    if spec.kind == KernelKind.SIGMOID:
        return np.tanh(spec.alpha * dot + spec.beta)
    return np.power(spec.alpha * dot + spec.beta, spec.delta)


def base_eval(spec: KernelSpec, x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")

    if spec.kind == KernelKind.RBF:
        diff = x - y
        value = np.exp(-spec.gamma * np.dot(diff, diff))
    else:
        value = _from_dot(spec, np.dot(x, y))
    return float(_check_finite(np.asarray(value), spec, "base kernel"))


def base_gram(spec: KernelSpec, X: np.ndarray, Z: np.ndarray | None = None) -> np.ndarray:
    """Layer-1 Gram matrix. Rows follow ``Z`` (or ``X`` when omitted), columns follow ``X``."""
    X = np.asarray(X, dtype=float)
    Z = X if Z is None else np.asarray(Z, dtype=float)
    if X.shape[1] != Z.shape[1]:
        raise ValueError(f"dimension mismatch: {Z.shape[1]} vs {X.shape[1]}")

    if spec.kind == KernelKind.RBF:
        gram = np.exp(-spec.gamma * cdist(Z, X, metric="sqeuclidean"))
    else:
        gram = _from_dot(spec, Z @ X.T)
    return _check_finite(gram, spec, "base kernel")


def base_diag(spec: KernelSpec, X: np.ndarray) -> np.ndarray:
    """Self-similarity k(x, x) of every row of ``X``."""
    X = np.asarray(X, dtype=float)
    if spec.kind == KernelKind.RBF:
        return np.ones(X.shape[0])
    return _check_finite(_from_dot(spec, np.einsum("ij,ij->i", X, X)), spec, "base kernel")


def compose_eval(spec: KernelSpec, k_prev: np.ndarray | float) -> np.ndarray | float:
    """Apply the kernel to a previous-layer kernel value in place of the dot product.

    RBF uses exp(-2 gamma (1 - k)), which equals the RBF of the previous feature
    map when that map has unit norm.
    """
    k = np.asarray(k_prev, dtype=float)
    if spec.kind == KernelKind.RBF:
        out = np.exp(-2.0 * spec.gamma * (1.0 - k))
    else:
        out = _from_dot(spec, k)
    out = _check_finite(np.asarray(out), spec, "composed kernel")
    return float(out) if np.ndim(k_prev) == 0 else out


def compose_deriv(spec: KernelSpec, k_prev: np.ndarray | float) -> np.ndarray | float:
    """Derivative of ``compose_eval`` with respect to its kernel input."""
    k = np.asarray(k_prev, dtype=float)
    if spec.kind == KernelKind.LINEAR:
        out = np.ones_like(k)
    elif spec.kind == KernelKind.RBF:
        out = 2.0 * spec.gamma * np.exp(-2.0 * spec.gamma * (1.0 - k))
    elif spec.kind == KernelKind.SIGMOID:
        out = spec.alpha * (1.0 - np.tanh(spec.alpha * k + spec.beta) ** 2)
    else:
        out = spec.alpha * spec.delta * np.power(spec.alpha * k + spec.beta, spec.delta - 1)
    out = _check_finite(np.asarray(out), spec, "composed kernel derivative")
    return float(out) if np.ndim(k_prev) == 0 else out
