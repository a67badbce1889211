from __future__ import annotations

from typing import TYPE_CHECKING, Any

if TYPE_CHECKING:
    from .train import TrainReport


class DeepMklError(Exception):
    """Base class for every failure raised by deepmkl."""


class ConfigError(DeepMklError):
    """Invalid architecture, options or experiment file."""


class DatasetError(DeepMklError):
    """A dataset could not be loaded, split or standardized."""


class NumericFailure(DeepMklError):
    """A kernel or matrix computation produced an undefined or non-finite value.

    The layer, set and kernel fields locate the failure inside the architecture when known.
    """

    def __init__(
        self,
        message: str,
        *,
        layer: int | None = None,
        set_index: int | None = None,
        kernel: Any = None,
    ):
        self.layer = layer
        self.set_index = set_index
        self.kernel = kernel
        where = [
            f"{name}={value}"
            for name, value in (("layer", layer), ("set", set_index), ("kernel", kernel))
            if value is not None
        ]
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class SingularWorkspaceError(NumericFailure):
    def __init__(self, message: str, *, condition: float):
        self.condition = condition
        super().__init__(f"{message}; condition estimate {condition:.3e}")


class SvmConvergenceError(DeepMklError):
    def __init__(self, residual: float, updates: int):
        self.residual = residual
        self.updates = updates
        super().__init__(f"SMO did not converge after {updates} pair updates (max KKT residual {residual:.3e})")


class TrainingError(DeepMklError):
    """Training stopped early. The partial report holds every iteration completed so far."""

    def __init__(self, message: str, report: TrainReport):
        self.report = report
        super().__init__(message)
