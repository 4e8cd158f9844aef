"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np


def as_float_array(x, name: str, ndim: int = 1) -> np.ndarray:
    """Coerce to a float64 ndarray of the given dimensionality, rejecting non-finite values."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 and ndim == 1:
        arr = arr.reshape(1)
    if arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_finite_scalar(x, name: str) -> float:
    x = float(x)
    if not np.isfinite(x):
        raise ValueError(f"{name} must be finite, got {x}")
    return x


def check_positive(x, name: str) -> float:
    x = check_finite_scalar(x, name)
    if x <= 0.0:
        raise ValueError(f"{name} must be > 0, got {x}")
    return x


def check_nonnegative(x, name: str) -> float:
    x = check_finite_scalar(x, name)
    if x < 0.0:
        raise ValueError(f"{name} must be >= 0, got {x}")
    return x


def check_unit_interval(x, name: str) -> float:
    x = check_finite_scalar(x, name)
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {x}")
    return x


def check_strictly_increasing(arr: np.ndarray, name: str) -> None:
    if arr.size > 1 and not np.all(np.diff(arr) > 0):
        raise ValueError(f"{name} must be strictly increasing")
