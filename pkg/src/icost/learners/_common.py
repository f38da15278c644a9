from __future__ import annotations

import numpy as np

from ..errors import DegenerateLabels, DimensionMismatch, ValidationError


def check_problem(X, y, weights):
    """Validate a binary training problem; returns float X, int 0/1 y, float weights."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    if X.ndim != 2:
        raise DimensionMismatch(f"X must be 2-D, got shape {X.shape}")
    if y.shape != (X.shape[0],):
        raise DimensionMismatch("y length does not match X rows")
    if X.shape[0] < 2:
        raise DegenerateLabels("need at least 2 training rows")
    values = set(np.unique(y).tolist())
    if not values <= {0, 1}:
        raise DegenerateLabels(f"targets must be 0/1, got {sorted(values)}")
    if len(values) != 2:
        raise DegenerateLabels("both classes must be present in the training data")
    if not np.all(np.isfinite(X)):
        raise ValidationError("X contains non-finite values")
    if weights is None:
        w = np.ones(X.shape[0])
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != y.shape:
            raise DimensionMismatch("weights length does not match y")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("weights must be positive and finite")
    return X, y.astype(np.int64), w


def check_rows(X, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != n_features:
        raise DimensionMismatch(f"model expects {n_features} features, got shape {X.shape}")
    return X
