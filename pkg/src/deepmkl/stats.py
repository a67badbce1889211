"""Comparison statistics over a datasets x methods accuracy grid."""

from typing import Literal

import numpy as np
from scipy.stats import norm, rankdata

TieMethod = Literal["average", "min", "dense"]

# Accuracies and differences are rounded to this many decimals before tie detection.
TIE_DECIMALS = 10
EXACT_LIMIT = 20


def mean_ranks(acc: np.ndarray, ties: TieMethod = "average") -> np.ndarray:
    """Per-method mean rank; within each dataset the highest accuracy ranks 1."""
    acc = np.asarray(acc, dtype=float)
    if acc.ndim != 2 or acc.size == 0:
        raise ValueError(f"expected a non-empty datasets x methods matrix, got shape {acc.shape}")
    if np.isnan(acc).any():
        raise ValueError("accuracy grid has missing cells")
    ranks = rankdata(-np.round(acc, TIE_DECIMALS), method=ties, axis=1)
    return ranks.mean(axis=0)


def _exact_two_sided(doubled_ranks: np.ndarray, doubled_w: int) -> float:
    """Null distribution of the positive rank sum over all 2^n sign assignments."""
    counts = np.zeros(int(doubled_ranks.sum()) + 1)
    counts[0] = 1.0
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: len(counts) - r]
        counts = counts + shifted
    total = counts.sum()
    lower = counts[: doubled_w + 1].sum() / total
    upper = counts[doubled_w:].sum() / total
    return min(1.0, 2.0 * min(lower, upper))


def _normal_two_sided(ranks: np.ndarray, w_plus: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_sizes**3 - tie_sizes) / 48.0
    if var <= 0:
        return 1.0
    z = max(abs(w_plus - mean) - 0.5, 0.0) / np.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(z)))


def wilcoxon_signed_rank(a: np.ndarray, b: np.ndarray, exact_limit: int = EXACT_LIMIT) -> float:
    """Two-sided paired Wilcoxon signed-rank p-value.

    Zero differences are dropped. Up to ``exact_limit`` remaining pairs use the
    exact null distribution (tie-averaged ranks included); beyond that a normal
    approximation with tie and continuity corrections.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"paired samples must be 1-D and of equal length, got {a.shape} and {b.shape}")
    if len(a) < 2:
        raise ValueError("need at least 2 pairs")

    diff = np.round(a - b, TIE_DECIMALS)
    diff = diff[diff != 0]
    if len(diff) == 0:
        return 1.0

    ranks = rankdata(np.abs(diff))
    w_plus = float(ranks[diff > 0].sum())
    if len(diff) <= exact_limit:
        doubled = np.rint(2 * ranks).astype(int)
        return _exact_two_sided(doubled, int(round(2 * w_plus)))
    return _normal_two_sided(ranks, w_plus)


def p_values(acc: np.ndarray, reference: int) -> list[float | None]:
    """Wilcoxon p-value of every method column against the reference column (None for itself)."""
    acc = np.asarray(acc, dtype=float)
    return [
        None if j == reference else wilcoxon_signed_rank(acc[:, j], acc[:, reference]) for j in range(acc.shape[1])
    ]
