from .benchmark import BENCHMARK_ACCURACY, BENCHMARK_METHODS, BENCHMARK_P_VALUES, BENCHMARK_RANKS
from .roster import DEFAULT_KERNELS

__all__ = [
    "BENCHMARK_ACCURACY",
    "BENCHMARK_METHODS",
    "BENCHMARK_P_VALUES",
    "BENCHMARK_RANKS",
    "DEFAULT_KERNELS",
]
