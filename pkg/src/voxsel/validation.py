"""Small input-validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError

from .errors import DataError


def check_matrix(X, name: str = "X") -> np.ndarray:
    """Coerce to a finite 2-D float64 matrix."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise DataError(f"{name} must be a non-empty 2-D matrix", code="bad-matrix")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{name} contains non-finite values", code="bad-matrix")
    return X


def check_X_y(X, y):
    X = check_matrix(X)
    y = np.asarray(y)
    if y.ndim != 1 or y.shape[0] != X.shape[0]:
        raise DataError("y must be 1-D and match X rows", code="length-mismatch")
    return X, y


def check_n_features(estimator, X):
    X = check_matrix(X)
    expected = getattr(estimator, "n_features_in_", None)
    if expected is None:
        raise NotFittedError(f"{type(estimator).__name__} is not fitted")
    if X.shape[1] != expected:
        raise DataError(
            f"expected {expected} features, got {X.shape[1]}",
            code="dimension-mismatch")
    return X
