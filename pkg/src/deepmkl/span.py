"""Smoothed span bound on the leave-one-out error and its weight gradient.

For support vector ``p`` the regularized span is

    S_p^2 = 1 / [B^-1]_pp - Q_pp,   B = [[K_sv, 1], [1^T, 0]] + Q,

with ``Q = diag(eta / alpha_sv, 0)``. The bound is ``T = sum_p phi(alpha_p S_p^2 - 1)``
where ``phi`` is a sigmoid with slope ``c`` and offset ``d``. Gradients hold the
support set fixed: free vectors (``0 < alpha < C``) move along their margin
equations while vectors at the box bound stay at ``C``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .config import config
from .errors import ConfigError, NumericFailure, SingularWorkspaceError
from .svm import SvmModel

MAX_CONDITION = 1e12


@dataclass(frozen=True)
class SpanConfig:
    c: float = field(default_factory=lambda: config.span_c)
    d_offset: float = field(default_factory=lambda: config.span_d)
    eta: float = field(default_factory=lambda: config.eta)
    # Adds S_p^2 * d(alpha_p) to the bound's gradient on top of alpha_p * d(S_p^2).
    include_alpha_term: bool = True

    def __post_init__(self):
        if self.c <= 0 or self.eta <= 0:
            raise ConfigError(f"span config needs c > 0 and eta > 0, got c={self.c}, eta={self.eta}")


@dataclass(frozen=True)
class SpanWorkspace:
    sv: np.ndarray
    alpha_sv: np.ndarray
    y_sv: np.ndarray
    bordered: np.ndarray
    q: np.ndarray
    B: np.ndarray
    B_inv: np.ndarray
    g: np.ndarray
    # Positions within ``sv`` of the free vectors, and their bordered margin matrix.
    free: np.ndarray
    margin: np.ndarray

    @property
    def n_sv(self) -> int:
        return len(self.sv)


def phi(x: np.ndarray | float, cfg: SpanConfig) -> np.ndarray | float:
    return expit(cfg.c * np.asarray(x) - cfg.d_offset)


def phi_prime(x: np.ndarray | float, cfg: SpanConfig) -> np.ndarray | float:
    value = phi(x, cfg)
    return cfg.c * value * (1.0 - value)


def _inverse(matrix: np.ndarray) -> np.ndarray:
    condition = float(np.linalg.cond(matrix))
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise SingularWorkspaceError(
            "regularized support-vector matrix is numerically singular; try a larger eta", condition=condition
        )
    return np.linalg.inv(matrix)


def build_workspace(model: SvmModel, K: np.ndarray, cfg: SpanConfig) -> SpanWorkspace:
    sv = model.sv_indices
    n_sv = len(sv)
    if n_sv < 2:
        raise NumericFailure(f"span bound needs at least 2 support vectors, got {n_sv}")

    alpha_sv = model.alpha[sv]
    bordered = np.ones((n_sv + 1, n_sv + 1))
    bordered[:n_sv, :n_sv] = np.asarray(K, dtype=float)[np.ix_(sv, sv)]
    bordered[n_sv, n_sv] = 0.0

    q = np.append(cfg.eta / alpha_sv, 0.0)
    g = np.append(-cfg.eta / alpha_sv**2, 0.0)
    B = bordered + np.diag(q)

    free = np.flatnonzero(alpha_sv < model.C - config.sv_threshold)
    rows = np.append(free, n_sv)
    return SpanWorkspace(
        sv=sv,
        alpha_sv=alpha_sv,
        y_sv=model.y[sv],
        bordered=bordered,
        q=q,
        B=B,
        B_inv=_inverse(B),
        g=g,
        free=free,
        margin=bordered[np.ix_(rows, rows)],
    )


def smoothed_spans(ws: SpanWorkspace) -> np.ndarray:
    """S_p^2 for every support vector, in ``ws.sv`` order."""
    diag = np.diag(ws.B_inv)[: ws.n_sv]
    if np.any(diag <= 0):
        p = int(np.flatnonzero(diag <= 0)[0])
        raise NumericFailure(f"[B^-1]_pp <= 0 at support vector {p}; support set or eta is invalid")
    return 1.0 / diag - ws.q[: ws.n_sv]


def smoothed_span_sq(ws: SpanWorkspace, p: int) -> float:
    if not 0 <= p < ws.n_sv:
        raise IndexError(f"support vector index {p} out of range for {ws.n_sv} support vectors")
    return float(smoothed_spans(ws)[p])


def t_span(model: SvmModel, ws: SpanWorkspace, cfg: SpanConfig) -> float:
    return float(np.sum(phi(ws.alpha_sv * smoothed_spans(ws) - 1.0, cfg)))


def alpha_derivative(ws: SpanWorkspace, dK_sv: np.ndarray) -> np.ndarray:
    """d(alpha_sv) for a kernel perturbation.

    Vectors at the bound keep ``alpha = C``. The free vectors ``f`` stay on the margin, so

        [[K_ff, 1], [1^T, 0]] (d(y_f * alpha_f); db) = (-dK_f,sv (y_sv * alpha_sv); 0)
    """
    d_alpha = np.zeros(ws.n_sv)
    if len(ws.free) == 0:
        return d_alpha
    rhs = np.append(-(dK_sv[ws.free] @ (ws.y_sv * ws.alpha_sv)), 0.0)
    try:
        solution = np.linalg.solve(ws.margin, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularWorkspaceError(
            "margin system of the free support vectors is singular; support vectors may be duplicated",
            condition=float(np.linalg.cond(ws.margin)),
        ) from exc
    d_alpha[ws.free] = ws.y_sv[ws.free] * solution[:-1]
    return d_alpha


def span_grad(ws: SpanWorkspace, dK_full: np.ndarray, model: SvmModel, cfg: SpanConfig) -> tuple[np.ndarray, float]:
    """(d S_p^2 for every support vector, d T_span) for one kernel weight.

    ``F`` is the alpha derivative, so ``G F`` is the change of ``Q`` and

        d S_p^2 = [B^-1 (dK~ + G F) B^-1]_pp / ([B^-1]_pp)^2 - (G F)_pp.
    """
    n_sv = ws.n_sv
    dK_sv = np.asarray(dK_full, dtype=float)[np.ix_(ws.sv, ws.sv)]

    d_alpha = alpha_derivative(ws, dK_sv)
    gf = ws.g * np.append(d_alpha, 0.0)
    dB = np.zeros_like(ws.B)
    dB[:n_sv, :n_sv] = dK_sv
    dB += np.diag(gf)

    b_inv_diag = np.diag(ws.B_inv)
    sandwich = np.einsum("pi,ip->p", ws.B_inv @ dB, ws.B_inv)
    d_spans = (sandwich / b_inv_diag**2 - gf)[:n_sv]

    spans = smoothed_spans(ws)
    slope = phi_prime(ws.alpha_sv * spans - 1.0, cfg)
    inner = ws.alpha_sv * d_spans
    if cfg.include_alpha_term:
        inner = inner + spans * d_alpha
    return d_spans, float(np.sum(slope * inner))
