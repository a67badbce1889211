"""CSV ingest and the evaluation protocol: drop incomplete rows, split, standardize."""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
from loguru import logger

from .config import config
from .errors import DatasetError

# Columns whose training stddev falls below this are centered but not scaled.
MIN_SCALE = 1e-12


@dataclass(frozen=True)
class RawDataset:
    """Complete rows of a CSV file with labels mapped to {-1, +1}.

    ``label_values`` holds the original label text for (-1, +1).
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    label_column: str
    label_values: tuple[str, str]
    n_dropped: int = 0

    def __len__(self) -> int:
        return len(self.y)

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def subset(self, rows: np.ndarray) -> "RawDataset":
        return RawDataset(
            X=self.X[rows],
            y=self.y[rows],
            feature_names=self.feature_names,
            label_column=self.label_column,
            label_values=self.label_values,
        )

    def to_csv(self, path: str | Path) -> None:
        frame = pd.DataFrame(self.X, columns=self.feature_names)
        negative, positive = self.label_values
        frame[self.label_column] = np.where(self.y > 0, positive, negative)
        frame.to_csv(path, index=False, float_format="%.17g")


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    mean: np.ndarray
    scale: np.ndarray

    def __len__(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class SplitSpec:
    seed: int
    train_fraction: float = 0.5

    def __post_init__(self):
        if self.seed < 0:
            raise DatasetError(f"split seed must be non-negative, got {self.seed}")
        if not 0 < self.train_fraction < 1:
            raise DatasetError(f"train fraction must lie in (0, 1), got {self.train_fraction}")


def load_csv(path: str | Path, label_column: str) -> RawDataset:
    """Read a UTF-8 CSV with a header row.

    Rows with an empty or non-numeric feature cell, or an empty label, are dropped.
    The two label values map to -1 and +1 in lexicographic order of their text.
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}")

    frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True)
    if label_column not in frame.columns:
        raise DatasetError(f"label column {label_column!r} not in header of {path}")

    labels = frame[label_column].str.strip()
    features = frame.drop(columns=[label_column]).apply(lambda col: pd.to_numeric(col.str.strip(), errors="coerce"))
    if features.shape[1] == 0:
        raise DatasetError(f"{path} has no feature columns")

    values = features.to_numpy(dtype=float)
    complete = np.isfinite(values).all(axis=1) & (labels != "").to_numpy()
    n_dropped = int((~complete).sum())
    if not complete.any():
        raise DatasetError(f"no complete rows survive in {path}")

    kept_labels = labels[complete].to_numpy()
    distinct = sorted(set(kept_labels))
    if len(distinct) != 2:
        raise DatasetError(f"label column {label_column!r} must have exactly 2 distinct values, found {len(distinct)}")

    logger.info(f"Loaded {path.name}: {int(complete.sum())} rows kept, {n_dropped} dropped for missing values")
    return RawDataset(
        X=values[complete],
        y=np.where(kept_labels == distinct[1], 1.0, -1.0),
        feature_names=list(features.columns),
        label_column=label_column,
        label_values=(distinct[0], distinct[1]),
        n_dropped=n_dropped,
    )


def split(raw: RawDataset, spec: SplitSpec) -> tuple[RawDataset, RawDataset]:
    """Seeded uniform permutation; the first floor(n * fraction) rows train."""
    n = len(raw)
    if n < 4:
        raise DatasetError(f"need at least 4 rows to split, got {n}")

    order = np.random.default_rng(spec.seed).permutation(n)
    n_train = math.floor(n * spec.train_fraction)
    train_rows, test_rows = order[:n_train], order[n_train:]
    train = raw.subset(train_rows)
    if len(np.unique(train.y)) < 2:
        raise DatasetError(f"seed {spec.seed} leaves a single-class training set; choose another seed")
    return train, raw.subset(test_rows)


def standardize(train: RawDataset, test: RawDataset) -> tuple[Dataset, Dataset]:
    """Scale both halves with training-half column statistics (sample stddev)."""
    if len(train) == 0:
        raise DatasetError("training set is empty")
    if train.n_features != test.n_features:
        raise ValueError(f"dimension mismatch: train has {train.n_features} features, test has {test.n_features}")

    mean = train.X.mean(axis=0)
    if len(train) > 1:
        std = train.X.std(axis=0, ddof=1)
    else:
        std = np.zeros(train.n_features)
    scale = np.where(std < MIN_SCALE, 1.0, std)

    def transform(raw: RawDataset) -> Dataset:
        return Dataset(X=(raw.X - mean) / scale, y=raw.y.copy(), mean=mean, scale=scale)

    return transform(train), transform(test)


def prepare(
    path: str | Path, label_column: str, seed: int, train_fraction: float | None = None
) -> tuple[Dataset, Dataset]:
    """load_csv, split and standardize in one call."""
    fraction = config.train_fraction if train_fraction is None else train_fraction
    raw = load_csv(path, label_column)
    return standardize(*split(raw, SplitSpec(seed=seed, train_fraction=fraction)))
