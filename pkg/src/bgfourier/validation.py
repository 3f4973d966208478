"""Small argument-checking helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .errors import DataValidationError, NonUniformGridError

# Relative tolerance for deciding a time grid is uniform.
UNIFORM_RTOL = 1e-9


def as_1d_float(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise DataValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def require_finite(arr: np.ndarray, name: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise DataValidationError(f"{name} contains non-finite values")


def require_same_length(a: np.ndarray, b: np.ndarray, name_a: str, name_b: str) -> None:
    if a.shape[0] != b.shape[0]:
        raise DataValidationError(
            f"{name_a} and {name_b} must have equal length, got {a.shape[0]} and {b.shape[0]}"
        )


def uniform_spacing(times: np.ndarray) -> float:
    """Return the common spacing of a uniform grid, or raise.

    Uniformity is judged against the mean spacing with relative tolerance
    1e-9; grids of fewer than two points have no spacing to speak of.
    """
    if times.shape[0] < 2:
        raise DataValidationError("at least two time stamps are required")
    diffs = np.diff(times)
    dt = float(np.mean(diffs))
    if dt <= 0:
        raise NonUniformGridError("time stamps must be strictly increasing")
    if np.max(np.abs(diffs - dt)) > UNIFORM_RTOL * abs(dt):
        raise NonUniformGridError(
            "time stamps are not uniformly spaced within relative tolerance 1e-9"
        )
    return dt


def require_positive(value: float, name: str) -> None:
    if not value > 0:
        raise DataValidationError(f"{name} must be positive, got {value}")


def require_nonnegative(value: float, name: str) -> None:
    if not value >= 0:
        raise DataValidationError(f"{name} must be nonnegative, got {value}")
