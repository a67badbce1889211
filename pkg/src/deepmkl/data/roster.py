# Base kernels used at every layer when an architecture does not name its own.
DEFAULT_KERNELS = [
    {"kind": "linear"},
    {"kind": "rbf", "gamma": 1.0},
    {"kind": "sigmoid", "alpha": -1e-4, "beta": 1.0},
    {"kind": "polynomial", "alpha": 1.0, "beta": 1.0, "delta": 2},
]
