"""Input checks shared by the estimators, the config loader and the CLI."""

from __future__ import annotations

import math
import numbers

import numpy as np
from sklearn.utils.validation import check_array, check_scalar


def check_alphas(X) -> np.ndarray:
    """Initial values as a 1-D float array.

    Accepts a scalar, a 1-D sequence or a single-column 2-D array.
    """
    arr = np.asarray(X, dtype=float) if np.ndim(X) == 0 else X
    arr = check_array(np.atleast_1d(arr), ensure_2d=False, dtype=float)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"expected a single column of initial values, got shape {arr.shape}")
        arr = arr[:, 0]
    return arr


def check_positive(value, name: str, *, integer: bool = False, min_val=None, max_val=None,
                   include_boundaries: str = "neither"):
    """Finite positive scalar (or integer), optionally bounded."""
    kind = numbers.Integral if integer else numbers.Real
    lo = 0 if min_val is None else min_val
    value = check_scalar(value, name, kind, min_val=lo, max_val=max_val,
                         include_boundaries=include_boundaries if min_val is not None
                         or max_val is not None else "neither")
    if not integer and not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


def check_tolerances(rel_tol, abs_tol):
    check_positive(rel_tol, "rel_tol", max_val=1.0)
    check_positive(abs_tol, "abs_tol", max_val=1.0)
    return float(rel_tol), float(abs_tol)


def check_unit_interval(value, name: str) -> float:
    return float(check_scalar(value, name, numbers.Real, min_val=0.0, max_val=1.0,
                              include_boundaries="neither"))
