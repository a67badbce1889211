"""Capacity calculators for deep multiple kernel architectures.

The pseudo-dimension of the kernel family is bounded by its free weight count,
which in turn bounds the second-order Rademacher chaos complexity.
"""

import math
from dataclasses import dataclass

from .errors import ConfigError

# Constant of the Rademacher chaos bound, (192 e + 1).
CHAOS_CONSTANT = 192 * math.e + 1


@dataclass(frozen=True)
class BoundQuery:
    layers: int
    sets: int
    kernels: int
    u: float = 1.0

    def __post_init__(self):
        if min(self.layers, self.sets, self.kernels) < 1:
            raise ConfigError(f"layers, sets and kernels must be >= 1, got {self.layers}, {self.sets}, {self.kernels}")
        if self.u < 0:
            raise ConfigError(f"kernel sup u must be non-negative, got {self.u}")


def pseudo_dim_bound(layers: int, sets: int, kernels: int) -> int:
    """m for a single layer, (l - 2) h^2 m + 2 h m otherwise."""
    if min(layers, sets, kernels) < 1:
        raise ConfigError(f"layers, sets and kernels must be >= 1, got {layers}, {sets}, {kernels}")
    if layers == 1:
        return kernels
    return (layers - 2) * sets**2 * kernels + 2 * sets * kernels


def rademacher_bound(query: BoundQuery) -> float:
    return CHAOS_CONSTANT * query.u**2 * pseudo_dim_bound(query.layers, query.sets, query.kernels)


def equivalent_ffn_width(layers: int, sets: int, kernels: int) -> float:
    """Hidden width d of a feed-forward network with as many free weights, d^2 (l - 1)."""
    if layers < 2:
        raise ConfigError("equivalent feed-forward width needs at least 2 layers")
    return math.sqrt(pseudo_dim_bound(layers, sets, kernels) / (layers - 1))
