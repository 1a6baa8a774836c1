"""JSON encoding shared by the file formats and the CLI.

Real scalars serialize as plain numbers, complex scalars as [re, im]
pairs.  Vectors are flat lists; matrices are column-major (a list of
columns).  Emission is canonical (sorted keys, fixed separators) so equal
inputs produce byte-identical output.
"""

from __future__ import annotations

import json

import numpy as np

from .validation import COMPLEX, field_dtype

__all__ = [
    "scalar_to_json",
    "scalar_from_json",
    "vector_to_json",
    "vector_from_json",
    "matrix_to_json",
    "matrix_from_json",
    "dumps_canonical",
]


def scalar_to_json(value, field: str):
    if field == COMPLEX:
        value = complex(value)
        return [value.real, value.imag]
    return float(np.real(value))


def scalar_from_json(value, field: str):
    if field == COMPLEX:
        if isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ValueError(f"complex scalar must be [re, im], got {value!r}")
            return complex(value[0], value[1])
        return complex(value)
    if isinstance(value, (list, tuple)):
        raise ValueError("real field cannot parse [re, im] scalars")
    return float(value)


def vector_to_json(vector, field: str) -> list:
    return [scalar_to_json(v, field) for v in np.asarray(vector)]


def vector_from_json(values, field: str) -> np.ndarray:
    return np.array([scalar_from_json(v, field) for v in values], dtype=field_dtype(field))


def matrix_to_json(matrix, field: str) -> list:
    """Column-major: a list of columns, each a list of scalars."""
    matrix = np.asarray(matrix)
    return [vector_to_json(matrix[:, j], field) for j in range(matrix.shape[1])]


def matrix_from_json(columns, field: str) -> np.ndarray:
    cols = [vector_from_json(col, field) for col in columns]
    if not cols:
        return np.zeros((0, 0), dtype=field_dtype(field))
    return np.column_stack(cols)


def dumps_canonical(payload) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"
