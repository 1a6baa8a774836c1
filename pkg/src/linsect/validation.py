"""Input validation helpers.

All public entry points funnel array inputs through these checks so the
rest of the code can assume finite float64/complex128 data.  The field tag
is the single source of truth for real-vs-complex behaviour: "R" maps to
float64, "C" to complex128, and conjugation on real arrays is a no-op.
"""

from __future__ import annotations

import numpy as np

REAL = "R"
COMPLEX = "C"

__all__ = [
    "REAL",
    "COMPLEX",
    "field_dtype",
    "field_of",
    "check_field",
    "as_field_array",
    "check_vector",
    "check_matrix",
    "check_tensor",
]


def field_dtype(field: str):
    if field == REAL:
        return np.float64
    if field == COMPLEX:
        return np.complex128
    raise ValueError(f"field must be 'R' or 'C', got {field!r}")


def field_of(array: np.ndarray) -> str:
    return COMPLEX if np.iscomplexobj(array) else REAL


def check_field(field: str) -> str:
    field_dtype(field)
    return field


def _check_finite(arr: np.ndarray, name: str) -> np.ndarray:
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf entries")
    return arr


def as_field_array(values, field: str, name: str = "array") -> np.ndarray:
    arr = np.asarray(values, dtype=field_dtype(field))
    return _check_finite(arr, name)


def _coerce(values, name: str) -> np.ndarray:
    arr = np.asarray(values)
    if arr.dtype.kind not in "fc":
        arr = arr.astype(np.float64)
    elif arr.dtype.kind == "f":
        arr = arr.astype(np.float64, copy=False)
    else:
        arr = arr.astype(np.complex128, copy=False)
    return _check_finite(arr, name)


def check_vector(values, name: str = "vector") -> np.ndarray:
    arr = _coerce(values, name)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    return arr


def check_matrix(values, name: str = "matrix", square: bool = False) -> np.ndarray:
    arr = _coerce(values, name)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_tensor(values, ndim: int | None = None, name: str = "tensor") -> np.ndarray:
    arr = _coerce(values, name)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} modes, got shape {arr.shape}")
    return arr
