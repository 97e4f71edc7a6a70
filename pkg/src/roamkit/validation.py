"""Input validation helpers used across the public API."""

import numpy as np


def as_point(value, dim=None, name="point"):
    """Coerce ``value`` to a 1-D float64 array and validate it.

    Parameters
    ----------
    value : array-like
        Coordinates of a single point.
    dim : int, optional
        Required dimension; any dimension >= 2 is accepted when omitted.
    name : str
        Label used in error messages.
    """
    arr = np.asarray(value, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise ValueError(f"{name} must have dimension {dim}, got {arr.shape[0]}")
    if arr.shape[0] < 2:
        raise ValueError(f"{name} must have dimension >= 2, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values: {arr}")
    return arr


def as_points(value, dim=None, name="points"):
    """Coerce ``value`` to a 2-D (n, d) float64 array of row points."""
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D array, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"{name} must have {dim} columns, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_unit(vector, tol=1e-9, name="direction"):
    """Validate that ``vector`` has unit Euclidean norm within ``tol``."""
    arr = as_point(vector, name=name)
    norm = np.linalg.norm(arr)
    if abs(norm - 1.0) > tol:
        raise ValueError(f"{name} must be a unit vector (norm={norm!r})")
    return arr


def check_weights(weights, n=None, total_tol=1e-9, name="weights"):
    """Validate a nonnegative weight vector with total mass <= 1."""
    arr = np.asarray(weights, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"{name} must have length {n}, got {arr.shape[0]}")
    if arr.size and arr.min() < -total_tol:
        raise ValueError(f"{name} must be nonnegative, got min {arr.min()!r}")
    if arr.sum() > 1.0 + total_tol:
        raise ValueError(f"{name} must sum to at most 1, got {arr.sum()!r}")
    return np.clip(arr, 0.0, None)


def check_positive(value, name="value"):
    """Validate a strictly positive scalar."""
    value = float(value)
    if not value > 0:
        raise ValueError(f"{name} must be > 0, got {value!r}")
    return value
