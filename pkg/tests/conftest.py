"""Shared pytest fixtures and configuration for the test suite."""

import numpy as np
import pandas as pd
import pytest

from deepmkl.kernels import KernelSpec
from deepmkl.svm import SvmModel


def make_blobs(n_per_class: int = 10, seed: int = 7, spread: float = 0.3) -> tuple[np.ndarray, np.ndarray]:
    """Two Gaussian blobs centered at (2, 2) and (-2, -2); linearly separable for small spread."""
    rng = np.random.default_rng(seed)
    positive = rng.normal(loc=(2.0, 2.0), scale=spread, size=(n_per_class, 2))
    negative = rng.normal(loc=(-2.0, -2.0), scale=spread, size=(n_per_class, 2))
    X = np.vstack([positive, negative])
    y = np.concatenate([np.ones(n_per_class), -np.ones(n_per_class)])
    return X, y


def write_csv(path, X: np.ndarray, y: np.ndarray, names=("neg", "pos")):
    frame = pd.DataFrame(X, columns=[f"f{i}" for i in range(X.shape[1])])
    frame["label"] = np.where(y > 0, names[1], names[0])
    frame.to_csv(path, index=False)
    return path


@pytest.fixture
def blobs():
    """20 linearly separable points in 2-D, labels in {-1, +1}."""
    return make_blobs()


@pytest.fixture
def blob_csv(tmp_path):
    """40-row CSV of two separable blobs with a 'label' column holding 'neg'/'pos'."""
    X, y = make_blobs(n_per_class=20, seed=11)
    return write_csv(tmp_path / "blobs.csv", X, y)


@pytest.fixture
def two_point():
    """Two opposite unit-norm points: K = [[1, -1], [-1, 1]], y = (+1, -1)."""
    K = np.array([[1.0, -1.0], [-1.0, 1.0]])
    y = np.array([1.0, -1.0])
    return K, y


@pytest.fixture
def two_point_model(two_point):
    """Analytic SVM solution of the two-point problem with C = 10."""
    K, y = two_point
    return SvmModel(
        alpha=np.array([0.5, 0.5]),
        bias=0.0,
        sv_indices=np.array([0, 1]),
        C=10.0,
        dual_value=0.5,
        y=y,
    )


@pytest.fixture
def mixed_specs():
    """All four kernel kinds with their default hyperparameters."""
    return [KernelSpec.linear(), KernelSpec.rbf(), KernelSpec.sigmoid(), KernelSpec.polynomial()]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
