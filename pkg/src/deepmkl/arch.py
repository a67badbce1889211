"""Deep multiple kernel architecture.

Layer 1 combines ``m`` base kernels per set. Every later layer feeds each previous
set's normalized Gram matrix through the same ``m`` kernels in their composition
form and combines the results with non-negative weights. Each set is normalized
to unit self-similarity, and so is the final combined kernel.

Weight tensors, per layer:

* first layer: ``(h, m)``
* middle layers: ``(h, h, m)``, indexed ``[set, source_set, kernel]``
* last layer: ``(h, m)``, indexed ``[source_set, kernel]``; a single output set

With one layer there is a single ``(h, m)`` tensor and the ``h`` normalized set
Grams are averaged before the final normalization.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericFailure
from .kernels import KernelSpec, base_diag, base_gram, compose_deriv, compose_eval

# Raw self-similarities below this make normalization undefined.
MIN_DIAGONAL = 1e-300


@dataclass
class ArchConfig:
    layers: int
    sets: int
    specs: list[KernelSpec]
    theta: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if self.layers < 1 or self.sets < 1 or not self.specs:
            raise ConfigError(f"invalid architecture: layers={self.layers}, sets={self.sets}, m={len(self.specs)}")
        if not self.theta:
            self.theta = [np.full(shape, 1.0 / self.kernels) for shape in self.shapes]
        self.theta = [np.array(t, dtype=float) for t in self.theta]
        if [t.shape for t in self.theta] != self.shapes:
            raise ConfigError(f"weight shapes {[t.shape for t in self.theta]} do not match {self.shapes}")
        if any(np.any(t < 0) or not np.all(np.isfinite(t)) for t in self.theta):
            raise ConfigError("kernel weights must be finite and non-negative")

    @classmethod
    def uniform(cls, layers: int, sets: int, specs: list[KernelSpec]) -> "ArchConfig":
        """Every weight initialized to 1/m."""
        return cls(layers=layers, sets=sets, specs=list(specs))

    @property
    def kernels(self) -> int:
        return len(self.specs)

    @property
    def shapes(self) -> list[tuple[int, ...]]:
        h, m = self.sets, self.kernels
        if self.layers == 1:
            return [(h, m)]
        return [(h, m)] + [(h, h, m)] * (self.layers - 2) + [(h, m)]

    @property
    def n_weights(self) -> int:
        return sum(int(np.prod(shape)) for shape in self.shapes)

    def flat_theta(self) -> np.ndarray:
        return np.concatenate([t.ravel() for t in self.theta])

    def with_theta(self, flat: np.ndarray) -> "ArchConfig":
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.n_weights,):
            raise ValueError(f"expected {self.n_weights} weights, got {flat.shape}")
        theta, offset = [], 0
        for shape in self.shapes:
            size = int(np.prod(shape))
            theta.append(flat[offset : offset + size].reshape(shape))
            offset += size
        return ArchConfig(layers=self.layers, sets=self.sets, specs=self.specs, theta=theta)

    def weight_index(self) -> list[tuple[int, int, int | None, int]]:
        """(layer, set, source_set, kernel) for every flat weight position.

        ``set`` is the receiving set (0 for the single output of the last layer) and
        ``source_set`` the previous-layer set feeding it (None on the first layer).
        """
        index = []
        for layer, shape in enumerate(self.shapes):
            for position in np.ndindex(*shape):
                if layer == 0:
                    index.append((layer, position[0], None, position[1]))
                elif len(shape) == 3:
                    index.append((layer, position[0], position[1], position[2]))
                else:
                    index.append((layer, 0, position[0], position[1]))
        return index

    def kernel_of_weights(self) -> np.ndarray:
        """Kernel index (position in ``specs``) of every flat weight."""
        return np.array([k for *_, k in self.weight_index()])

    def to_dict(self) -> dict:
        return {
            "layers": self.layers,
            "sets": self.sets,
            "kernels": [spec.model_dump(mode="json", exclude_none=True) for spec in self.specs],
            "theta": [t.tolist() for t in self.theta],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ArchConfig":
        specs = [KernelSpec.model_validate(spec) for spec in data["kernels"]]
        theta = [np.asarray(t, dtype=float) for t in data.get("theta", [])]
        return cls(layers=data["layers"], sets=data["sets"], specs=specs, theta=theta)


@dataclass(frozen=True)
class LayerGrams:
    """Raw and normalized Gram matrices of every set in one layer.

    ``row_diag`` and ``col_diag`` hold the raw self-similarities used as
    normalization scales; for a square Gram they equal the raw diagonal.
    """

    raw: list[np.ndarray]
    normalized: list[np.ndarray]
    row_diag: list[np.ndarray]
    col_diag: list[np.ndarray]


@dataclass(frozen=True)
class GramStack:
    """Cached forward pass. The last entry of ``layers`` is the output layer with one set."""

    layers: list[LayerGrams]
    base: list[np.ndarray]
    n_rows: int
    n_cols: int
    square: bool

    @property
    def final(self) -> np.ndarray:
        return self.layers[-1].normalized[0]


def _normalize(raw: np.ndarray, row_diag: np.ndarray, col_diag: np.ndarray, layer: int, set_index: int) -> np.ndarray:
    if np.any(row_diag < MIN_DIAGONAL) or np.any(col_diag < MIN_DIAGONAL):
        raise NumericFailure("non-positive self-similarity, normalization undefined", layer=layer, set_index=set_index)
    normalized = raw / np.sqrt(np.outer(row_diag, col_diag))
    if not np.all(np.isfinite(normalized)):
        raise NumericFailure("non-finite normalized kernel", layer=layer, set_index=set_index)
    return normalized


def _finish_layer(raws: list[np.ndarray], layer: int, square: bool, row_diags=None, col_diags=None) -> LayerGrams:
    normalized = []
    if square:
        row_diags = [np.diag(raw).copy() for raw in raws]
        col_diags = row_diags
    for s, raw in enumerate(raws):
        norm = _normalize(raw, row_diags[s], col_diags[s], layer, s)
        if square:
            np.fill_diagonal(norm, 1.0)
        normalized.append(norm)
    return LayerGrams(raw=raws, normalized=normalized, row_diag=row_diags, col_diag=col_diags)


def _composed(config: ArchConfig, previous: np.ndarray, layer: int, set_index: int) -> list[np.ndarray]:
    try:
        return [compose_eval(spec, previous) for spec in config.specs]
    except NumericFailure as exc:
        raise NumericFailure(
            "non-finite composed kernel value", layer=layer, set_index=set_index, kernel=exc.kernel
        ) from exc


def _weighted_base(config: ArchConfig, values: list[np.ndarray]) -> list[np.ndarray]:
    return [sum(config.theta[0][s, k] * values[k] for k in range(config.kernels)) for s in range(config.sets)]


def _combine_layer(config: ArchConfig, layer: int, inputs: list[np.ndarray]) -> list[np.ndarray]:
    """Weighted sums for layer ``layer`` (0-based, > 0) given the previous layer's per-set values.

    ``inputs`` may be matrices or diagonal vectors; the combination is entrywise.
    """
    weights = config.theta[layer]
    composed = [_composed(config, inputs[s], layer, s) for s in range(config.sets)]
    if weights.ndim == 3:
        return [
            sum(weights[s, src, k] * composed[src][k] for src in range(config.sets) for k in range(config.kernels))
            for s in range(config.sets)
        ]
    return [sum(weights[src, k] * composed[src][k] for src in range(config.sets) for k in range(config.kernels))]


def forward(config: ArchConfig, X: np.ndarray, Z: np.ndarray | None = None) -> GramStack:
    """Run the architecture over ``X`` (square Gram) or between ``Z`` rows and ``X`` columns.

    For the cross variant every point's self-similarity is carried through the same
    stack, so rows and columns are normalized by their own scales.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"expected a non-empty 2-D input matrix, got shape {X.shape}")
    square = Z is None
    base = [base_gram(spec, X, Z) for spec in config.specs]
    if square:
        base = [0.5 * (gram + gram.T) for gram in base]

    first = _weighted_base(config, base)
    if square:
        layers = [_finish_layer(first, 0, square=True)]
    else:
        Z = np.asarray(Z, dtype=float)
        row_base = [base_diag(spec, Z) for spec in config.specs]
        col_base = [base_diag(spec, X) for spec in config.specs]
        row_diags = _weighted_base(config, row_base)
        col_diags = _weighted_base(config, col_base)
        layers = [_finish_layer(first, 0, square=False, row_diags=row_diags, col_diags=col_diags)]

    for layer in range(1, config.layers):
        previous = layers[-1]
        raws = _combine_layer(config, layer, previous.normalized)
        if square:
            layers.append(_finish_layer(raws, layer, square=True))
        else:
            # Normalized self-similarities are 1, so every point shares the same scale.
            ones_r = [np.ones(len(d)) for d in previous.row_diag]
            ones_c = [np.ones(len(d)) for d in previous.col_diag]
            row_diags = _combine_layer(config, layer, ones_r)
            col_diags = _combine_layer(config, layer, ones_c)
            layers.append(_finish_layer(raws, layer, square=False, row_diags=row_diags, col_diags=col_diags))

    if config.layers == 1:
        averaged = [sum(layers[0].normalized) / config.sets]
        if square:
            layers.append(_finish_layer(averaged, 1, square=True))
        else:
            ones_r = [np.ones(averaged[0].shape[0])]
            ones_c = [np.ones(averaged[0].shape[1])]
            layers.append(_finish_layer(averaged, 1, square=False, row_diags=ones_r, col_diags=ones_c))

    n_rows, n_cols = layers[-1].normalized[0].shape
    return GramStack(layers=layers, base=base, n_rows=n_rows, n_cols=n_cols, square=square)


def forward_cross(config: ArchConfig, X_train: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Final kernel between ``Z`` rows and ``X_train`` columns."""
    return forward(config, X_train, Z).final


def _normalize_tangent(d_raw: np.ndarray, grams: LayerGrams, s: int) -> np.ndarray:
    raw_diag = grams.row_diag[s]
    scale = np.sqrt(np.outer(raw_diag, raw_diag))
    u = np.diag(d_raw) / raw_diag
    return d_raw / scale - 0.5 * grams.normalized[s] * (u[:, None] + u[None, :])


def _slopes(config: ArchConfig, stack: GramStack, layer: int) -> dict[tuple[int, int], np.ndarray]:
    """Entrywise d raw[layer][s] / d normalized[layer-1][src] for every (s, src) pair."""
    weights = config.theta[layer]
    previous = stack.layers[layer - 1].normalized
    derivs = [[compose_deriv(spec, previous[src]) for spec in config.specs] for src in range(config.sets)]
    receivers = range(config.sets) if weights.ndim == 3 else [0]
    slopes = {}
    for s in receivers:
        for src in range(config.sets):
            w = weights[s, src] if weights.ndim == 3 else weights[src]
            slopes[(s, src)] = sum(w[k] * derivs[src][k] for k in range(config.kernels))
    return slopes


def grad_theta(config: ArchConfig, stack: GramStack) -> list[np.ndarray]:
    """Exact derivative of the final Gram with respect to every weight, in ``flat_theta`` order.

    Tangents are pushed forward from the weight's own layer through the cached
    normalized Grams, reusing one set of composition slopes per layer.
    """
    if not stack.square:
        raise ValueError("weight gradients need a square Gram stack from forward(config, X)")

    n_layers = len(stack.layers)
    slopes = {layer: _slopes(config, stack, layer) for layer in range(1, config.layers)}

    def propagate(start: int, d_norm: dict[int, np.ndarray]) -> np.ndarray:
        for layer in range(start + 1, n_layers):
            grams = stack.layers[layer]
            if config.layers == 1:
                d_raw = {0: sum(d_norm.values()) / config.sets}
            else:
                d_raw = {}
                for (s, src), slope in slopes[layer].items():
                    if src in d_norm:
                        d_raw[s] = d_raw.get(s, 0.0) + slope * d_norm[src]
            d_norm = {s: _normalize_tangent(d, grams, s) for s, d in d_raw.items()}
        return d_norm.get(0, np.zeros((stack.n_rows, stack.n_cols)))

    grads = []
    for layer, s, src, k in config.weight_index():
        if layer == 0:
            d_raw = stack.base[k]
        else:
            previous = stack.layers[layer - 1].normalized[src]
            d_raw = compose_eval(config.specs[k], previous)
        d_norm = {s: _normalize_tangent(d_raw, stack.layers[layer], s)}
        grads.append(propagate(layer, d_norm))
    return grads
