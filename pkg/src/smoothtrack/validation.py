"""Argument checks shared by the library, the estimator and the CLI."""

import numbers

import numpy as np

from .exceptions import OrderError

MAX_ORDER = 8


def check_order(k):
    if isinstance(k, bool) or not isinstance(k, numbers.Integral):
        raise OrderError(f"order k must be an integer, got {k!r}")
    k = int(k)
    if not 0 <= k <= MAX_ORDER:
        raise OrderError(f"order k must lie in [0, {MAX_ORDER}], got {k}")
    return k


def check_positive(value, name, allow_zero=False):
    value = float(value)
    if not np.isfinite(value) or value < 0 or (value == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value!r}")
    return value


def check_gain(q, k=None):
    q = np.asarray(q, dtype=float).ravel()
    if q.size == 0 or not np.all(np.isfinite(q)):
        raise ValueError("gain vector must be non-empty and finite")
    if k is not None and q.size != k + 1:
        raise ValueError(f"gain vector must have {k + 1} entries for k={k}, got {q.size}")
    check_order(q.size - 1)
    return q


def check_observations(X, n_min=2):
    """Return observations as a float vector.

    Accepts a 1-D sequence or an ``(n_samples, 1)`` column, the layout
    scikit-learn transformers receive.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 2 and X.shape[1] == 1:
        X = X[:, 0]
    if X.ndim != 1:
        raise ValueError(f"observations must be 1-D or a single column, got shape {X.shape}")
    if X.size < n_min:
        raise ValueError(f"need at least {n_min} observations, got {X.size}")
    if not np.all(np.isfinite(X)):
        raise ValueError("observations contain NaN or infinity")
    return X


def check_init(init, k):
    if init is None:
        return np.zeros(k + 1)
    init = np.asarray(init, dtype=float).ravel()
    if init.size != k + 1 or not np.all(np.isfinite(init)):
        raise ValueError(f"initial estimate must be {k + 1} finite numbers, got {init!r}")
    return init
