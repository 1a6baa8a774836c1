"""Symmetric tensor spaces S^d(F^n) in compressed monomial coordinates.

A symmetric tensor is stored as one value per non-decreasing multi-index
(the value of the full tensor at any position sorting to that index), in
the lexicographic order produced by `enumerate_multi_indices`.  The
combinatorial multiplicity of each index enters only through the inner
product, which then agrees with the ambient inner product of the embedded
full tensors.

Contraction (`hook`) uses the bilinear, unconjugated pairing even over the
complex field: it realizes polynomial contraction, and conjugating would
break the holomorphy of membership tests.  The Hermitian inner product is
reserved for orthogonal complements and projections (`sym_inner`).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateBasis
from .numlin import DEFAULT_TOL, TolerancePolicy, numerical_rank
from .validation import check_matrix, check_vector

__all__ = [
    "sym_dim",
    "enumerate_multi_indices",
    "multiplicity",
    "diagonal_indices",
    "SymTensor",
    "vee",
    "sym_power",
    "lift_subspace",
    "lift_matrix",
    "hook",
    "mode_matrix",
    "sym_inner",
    "sym_norm",
    "to_full",
    "from_full",
]

# Materializing an index set or a full flattening beyond these sizes would
# exhaust desk-scale memory; callers get a clean error instead.
_MAX_INDEX_COUNT = 30_000_000
_MAX_FULL_SIZE = 140_000_000


def sym_dim(n: int, d: int) -> int:
    """dim S^d(F^n) = C(n+d-1, d)."""
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    return math.comb(n + d - 1, d)


def _check_enumerable(n: int, d: int) -> int:
    count = sym_dim(n, d)
    if count > _MAX_INDEX_COUNT:
        raise OverflowError(
            f"C({n + d - 1},{d}) = {count} multi-indices exceed the supported size"
        )
    if n ** d > 2**62:
        raise OverflowError(f"index codes for n={n}, d={d} overflow 64-bit integers")
    return count


@lru_cache(maxsize=None)
def _index_array(n: int, d: int) -> np.ndarray:
    """All non-decreasing d-tuples over {0..n-1}, lexicographic, shape (N, d)."""
    count = _check_enumerable(n, d)
    flat = np.fromiter(
        itertools.chain.from_iterable(itertools.combinations_with_replacement(range(n), d)),
        dtype=np.int32,
        count=count * d,
    )
    arr = flat.reshape(count, d)
    arr.setflags(write=False)
    return arr


def _encode(indices: np.ndarray, n: int) -> np.ndarray:
    code = np.zeros(indices.shape[0], dtype=np.int64)
    for k in range(indices.shape[1]):
        code = code * n + indices[:, k]
    return code


@lru_cache(maxsize=None)
def _comb_table(n_max: int, t_max: int) -> np.ndarray:
    table = np.zeros((n_max + 1, t_max + 1), dtype=np.int64)
    table[:, 0] = 1
    for i in range(1, n_max + 1):
        for t in range(1, t_max + 1):
            table[i, t] = table[i - 1, t] + table[i - 1, t - 1]
    table.setflags(write=False)
    return table


def _ranks_of_sorted(indices: np.ndarray, n: int, d: int) -> np.ndarray:
    """Lexicographic ranks of sorted multi-indices, computed combinatorially.

    Shifting a non-decreasing tuple by its position gives a strictly
    increasing one over {0..n+d-2}; its lexicographic rank telescopes into
    binomial differences (hockey-stick identity), so no enumeration of the
    index set is ever materialized.
    """
    big_n = n + d - 1
    table = _comb_table(big_n + 1, d)
    b = indices.astype(np.int64) + np.arange(d, dtype=np.int64)[None, :]
    prev = np.concatenate(
        [np.full((b.shape[0], 1), -1, dtype=np.int64), b[:, :-1]], axis=1
    )
    ranks = np.zeros(b.shape[0], dtype=np.int64)
    for k in range(d):
        t = d - k
        ranks += table[big_n - 1 - prev[:, k], t] - table[big_n - b[:, k], t]
    return ranks


@lru_cache(maxsize=None)
def _multiplicities(n: int, d: int) -> np.ndarray:
    """d! / prod_k mult_k! for every canonical multi-index."""
    idx = _index_array(n, d)
    count = idx.shape[0]
    denom = np.ones(count)
    run = np.ones(count)
    for k in range(1, d):
        same = idx[:, k] == idx[:, k - 1]
        run = np.where(same, run + 1, 1.0)
        denom *= np.where(same, run, 1.0)
    mult = math.factorial(d) / denom
    mult.setflags(write=False)
    return mult


@lru_cache(maxsize=None)
def _sqrt_multiplicities(n: int, d: int) -> np.ndarray:
    w = np.sqrt(_multiplicities(n, d))
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def _position_ranks(n: int, d: int) -> np.ndarray:
    """For every full-tensor position (flattened row-major), the compressed rank."""
    total = n**d
    if total > _MAX_FULL_SIZE:
        raise OverflowError(f"full flattening of size {n}^{d} is not supported")
    flat = np.arange(total, dtype=np.int64)
    digits = np.empty((total, d), dtype=np.int64)
    for k in range(d - 1, -1, -1):
        digits[:, k] = flat % n
        flat //= n
    digits.sort(axis=1)
    ranks = _ranks_of_sorted(digits, n, d)
    ranks.setflags(write=False)
    return ranks


def enumerate_multi_indices(n: int, d: int) -> list[tuple[int, ...]]:
    """All non-decreasing d-tuples over {1..n}, lexicographically sorted."""
    return [tuple(int(v) + 1 for v in row) for row in _index_array(n, d)]


def multiplicity(index: tuple[int, ...]) -> int:
    """Number of distinct orderings of a multi-index."""
    d = len(index)
    denom = 1
    for _, group in itertools.groupby(index):
        denom *= math.factorial(sum(1 for _ in group))
    return math.factorial(d) // denom


def diagonal_indices(s: int, d: int) -> list[tuple[int, ...]]:
    """The index set {(i,...,i) : i in 1..s}."""
    return [(i,) * d for i in range(1, s + 1)]


@dataclass(frozen=True)
class SymTensor:
    """Element of S^d(F^n) in compressed coordinates.

    coeffs[k] is the full-tensor entry at any position whose sorted index
    is the k-th canonical multi-index of (n, d).
    """

    n: int
    d: int
    coeffs: np.ndarray

    def __post_init__(self):
        expected = sym_dim(self.n, self.d)
        if self.coeffs.shape != (expected,):
            raise ValueError(
                f"coeffs must have shape ({expected},) for n={self.n}, d={self.d}, "
                f"got {self.coeffs.shape}"
            )


def _result_dtype(*arrays) -> type:
    return np.complex128 if any(np.iscomplexobj(a) for a in arrays) else np.float64


def vee(vectors) -> SymTensor:
    """Symmetric projection of v_1 x ... x v_d, compressed.

    For identical inputs this equals the compressed form of v^{(x)d}.
    """
    vs = [check_vector(v) for v in vectors]
    d = len(vs)
    if d == 0:
        raise ValueError("vee needs at least one vector")
    n = vs[0].shape[0]
    if any(v.shape[0] != n for v in vs):
        raise ValueError("all vectors must share one ambient dimension")
    idx = _index_array(n, d)
    dtype = _result_dtype(*vs)
    acc = np.zeros(idx.shape[0], dtype=dtype)
    for perm in itertools.permutations(range(d)):
        term = vs[perm[0]][idx[:, 0]].astype(dtype, copy=True)
        for k in range(1, d):
            term *= vs[perm[k]][idx[:, k]]
        acc += term
    acc /= math.factorial(d)
    return SymTensor(n, d, acc)


def sym_power(vector, d: int) -> SymTensor:
    """Compressed coordinates of v^{(x)d} (coefficient at a is prod v[a_k])."""
    v = check_vector(vector)
    n = v.shape[0]
    idx = _index_array(n, d)
    coeffs = v[idx[:, 0]].copy()
    for k in range(1, d):
        coeffs = coeffs * v[idx[:, k]]
    return SymTensor(n, d, coeffs)


def lift_matrix(basis, d: int, tol: TolerancePolicy = DEFAULT_TOL):
    """Stacked compressed coordinates of u_{a_1} v ... v u_{a_d}.

    Returns (index_rows, lifted) where index_rows is the (L, d) array of
    0-based multi-indices over the R basis columns and lifted is the
    (sym_dim(n, d), L) matrix whose columns span S^d(span(basis)).
    """
    basis = check_matrix(basis, name="basis")
    n, r = basis.shape
    if numerical_rank(basis, tol) < r:
        raise DegenerateBasis(f"basis has numerical rank below {r}")
    index_rows = _index_array(r, d)
    columns = [vee([basis[:, j] for j in row]).coeffs for row in index_rows]
    lifted = np.column_stack(columns) if columns else np.zeros((sym_dim(n, d), 0))
    return index_rows, lifted


def lift_subspace(basis, d: int, tol: TolerancePolicy = DEFAULT_TOL):
    """One (multi-index, SymTensor) pair per non-decreasing index tuple.

    Multi-indices are 1-based; the tensors' span is S^d of the column span
    of `basis`.
    """
    basis = check_matrix(basis, name="basis")
    n = basis.shape[0]
    index_rows, lifted = lift_matrix(basis, d, tol)
    return [
        (tuple(int(v) + 1 for v in row), SymTensor(n, d, lifted[:, k]))
        for k, row in enumerate(index_rows)
    ]


def hook(u: SymTensor, vector, ell: int) -> SymTensor:
    """Bilinear contraction of the first `ell` factors of u with v.

    The pairing is sum_k v_k w_k with no conjugation; the result is the
    symmetric degree d-ell tensor v^{(x)ell} _| u.
    """
    if not 1 <= ell <= u.d - 1:
        raise ValueError(f"need 1 <= ell <= d-1, got ell={ell}, d={u.d}")
    v = check_vector(vector)
    if v.shape[0] != u.n:
        raise ValueError("vector dimension does not match the tensor's ambient space")
    n, d = u.n, u.d
    left = _index_array(n, ell)
    right = _index_array(n, d - ell)
    n_left, n_right = left.shape[0], right.shape[0]
    if n_left * n_right * d > _MAX_FULL_SIZE:
        raise OverflowError("hook workspace too large")
    weights = _multiplicities(n, ell) * np.prod(v[left], axis=1)
    combo = np.concatenate(
        [
            np.repeat(left, n_right, axis=0),
            np.tile(right, (n_left, 1)),
        ],
        axis=1,
    )
    combo.sort(axis=1)
    gathered = u.coeffs[_ranks_of_sorted(combo, n, d)].reshape(n_left, n_right)
    return SymTensor(n, d - ell, weights @ gathered)


def mode_matrix(u: SymTensor) -> np.ndarray:
    """Flattening of the embedded full tensor: first factor vs the rest.

    Shape (n, n^{d-1}), row-major over the remaining factors.
    """
    ranks = _position_ranks(u.n, u.d)
    return u.coeffs[ranks].reshape(u.n, u.n ** (u.d - 1))


def sym_inner(x: SymTensor, y: SymTensor) -> complex:
    """Hermitian inner product matching the ambient product of embeddings."""
    if (x.n, x.d) != (y.n, y.d):
        raise ValueError("inner product needs matching (n, d)")
    mult = _multiplicities(x.n, x.d)
    value = np.sum(mult * np.conj(x.coeffs) * y.coeffs)
    return complex(value) if np.iscomplexobj(value) else float(value)


def sym_norm(x: SymTensor) -> float:
    mult = _multiplicities(x.n, x.d)
    return float(np.sqrt(np.sum(mult * np.abs(x.coeffs) ** 2)))


def to_full(u: SymTensor) -> np.ndarray:
    """Embedded full tensor of shape (n,)*d (small sizes only)."""
    ranks = _position_ranks(u.n, u.d)
    return u.coeffs[ranks].reshape((u.n,) * u.d)


def from_full(tensor) -> SymTensor:
    """Compress a full symmetric ndarray (values read off sorted positions)."""
    arr = np.asarray(tensor)
    n = arr.shape[0]
    d = arr.ndim
    if arr.shape != (n,) * d:
        raise ValueError(f"expected a cubic tensor, got shape {arr.shape}")
    idx = _index_array(n, d)
    flat = arr.reshape(-1)
    return SymTensor(n, d, flat[_encode(idx, n)].copy())
