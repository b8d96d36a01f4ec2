"""Small input-validation helpers shared across modules."""

import math

import numpy as np

from .exceptions import GeometryError


def check_positive(name, value, error=ValueError):
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise error(f"{name} must be positive and finite, got {value!r}")
    return value


def check_non_negative(name, value, error=ValueError):
    value = float(value)
    if not math.isfinite(value) or value < 0.0:
        raise error(f"{name} must be non-negative and finite, got {value!r}")
    return value


def check_finite(name, value, error=ValueError):
    value = float(value)
    if not math.isfinite(value):
        raise error(f"{name} must be finite, got {value!r}")
    return value


def check_geometry_array(X):
    """Validate an (n_samples, 5) array of ``l1, l2, w1, w2, h`` rows in meters.

    Returns a float64 copy. Raises ``GeometryError`` on wrong shape or on
    non-finite/negative entries.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] != 5:
        raise GeometryError(
            f"expected geometry rows with 5 columns (l1, l2, w1, w2, h), got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise GeometryError("geometry rows contain non-finite values")
    if np.any(X < 0):
        raise GeometryError("geometry rows contain negative dimensions")
    return X
