"""Dense numerical linear algebra kernel with one shared tolerance policy.

Rank decisions are always made relative to the largest singular value, so
every certificate built downstream is invariant under rescaling the input.
Eigendecompositions run over the complex field regardless of the input
dtype; consumers validate results through residuals, never by inspecting
imaginary parts.  All routines are pure functions of their arguments and
safe for concurrent use.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenFailure
from .validation import check_matrix

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOL",
    "numerical_rank",
    "kernel_basis",
    "pseudoinverse",
    "eig_pairs",
    "column_space_basis",
    "rank_from_gram",
    "canonicalize",
]


@dataclass(frozen=True)
class TolerancePolicy:
    """Shared numerical thresholds.

    rank_rel_tol: singular values below this fraction of the largest are
        treated as zero.
    residual_tol: relative residual accepted for reconstructions,
        memberships and certificate checks.
    eig_gap_rel_tol: two eigenvalues closer than this fraction of the
        largest magnitude count as repeated.
    max_retries: redraw budget for transient random failures.
    """

    rank_rel_tol: float = 1e-9
    residual_tol: float = 1e-8
    eig_gap_rel_tol: float = 1e-7
    max_retries: int = 5

    def __post_init__(self):
        for name in ("rank_rel_tol", "residual_tol", "eig_gap_rel_tol"):
            value = getattr(self, name)
            if not 0.0 < value < 1.0:
                raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
        if self.max_retries < 1:
            raise ValueError(f"max_retries must be >= 1, got {self.max_retries!r}")


DEFAULT_TOL = TolerancePolicy()


def _singular_values(matrix: np.ndarray) -> np.ndarray:
    if matrix.size == 0:
        return np.zeros(0)
    return np.linalg.svd(matrix, compute_uv=False)


def numerical_rank(matrix, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Number of singular values above rank_rel_tol times the largest."""
    matrix = check_matrix(matrix)
    sigma = _singular_values(matrix)
    if sigma.size == 0 or sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > tol.rank_rel_tol * sigma[0]))


def rank_from_gram(gram, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Rank of A from its Gram matrix A A*, for rows too wide to SVD.

    The threshold applies to the Gram's eigenvalues (squared singular
    values): forming A A* already costs half the precision, so comparing
    square roots against rank_rel_tol would count noise as rank.
    """
    gram = check_matrix(gram, square=True)
    if gram.size == 0:
        return 0
    eigvals = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    top = eigvals.max()
    if top == 0.0:
        return 0
    return int(np.count_nonzero(eigvals > tol.rank_rel_tol * top))


def kernel_basis(
    matrix, tol: TolerancePolicy = DEFAULT_TOL, scale_anchor: float | None = None
) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical null space.

    scale_anchor, when given, is an external magnitude the matrix would
    have if it were "genuinely nonzero" (e.g. unit input columns); the
    rank threshold then uses max(sigma_max, scale_anchor) so that a matrix
    that is numerically zero relative to its inputs has a full kernel.
    """
    matrix = check_matrix(matrix)
    rows, cols = matrix.shape
    if rows == 0 or cols == 0:
        return np.eye(cols, dtype=matrix.dtype if matrix.dtype.kind == "c" else np.float64)
    # Economy SVD already returns all `cols` right-singular vectors when
    # rows >= cols; wide matrices need the full factorization.
    _, sigma, vh = np.linalg.svd(matrix, full_matrices=rows < cols)
    top = float(sigma[0]) if sigma.size else 0.0
    if scale_anchor is not None:
        top = max(top, scale_anchor)
    rank = 0 if top == 0.0 else int(np.count_nonzero(sigma > tol.rank_rel_tol * top))
    return vh[rank:].conj().T


def pseudoinverse(matrix, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudoinverse with rank-thresholded singular values."""
    matrix = check_matrix(matrix)
    if matrix.size == 0:
        return matrix.conj().T.copy()
    u, sigma, vh = np.linalg.svd(matrix, full_matrices=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return np.zeros_like(matrix.conj().T)
    keep = sigma > tol.rank_rel_tol * sigma[0]
    inv = np.zeros_like(sigma)
    inv[keep] = 1.0 / sigma[keep]
    return (vh.conj().T * inv) @ u.conj().T


def eig_pairs(matrix) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors over the complex field.

    Returns (values, vectors) with vectors[:, k] paired to values[k];
    ordering is unspecified.  Residuals ||M v - lambda v|| are bounded by
    the backend's backward stability, well inside residual_tol.
    """
    matrix = check_matrix(matrix, square=True)
    try:
        values, vectors = np.linalg.eig(matrix.astype(np.complex128, copy=False))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - backend dependent
        raise EigenFailure(str(exc)) from exc
    return values, vectors


def column_space_basis(matrix, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (as columns) of the numerical column space."""
    matrix = check_matrix(matrix)
    if matrix.size == 0:
        return np.zeros((matrix.shape[0], 0))
    u, sigma, _ = np.linalg.svd(matrix, full_matrices=False)
    if sigma.size == 0 or sigma[0] == 0.0:
        return u[:, :0]
    rank = int(np.count_nonzero(sigma > tol.rank_rel_tol * sigma[0]))
    return u[:, :rank]


def canonicalize(vector, significance: float = 1e-6) -> tuple[np.ndarray, complex]:
    """Unit-normalize with the first significant entry made positive real.

    Returns (unit, scale) with vector = scale * unit.  The zero vector is
    returned unchanged with scale 0.
    """
    vector = np.asarray(vector)
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        return vector.copy(), 0.0
    sig = np.flatnonzero(np.abs(vector) > significance * norm)
    pivot_idx = int(sig[0]) if sig.size else int(np.argmax(np.abs(vector)))
    pivot = vector[pivot_idx]
    phase = pivot / abs(pivot)
    unit = vector / (norm * phase)
    scale = norm * phase
    if not np.iscomplexobj(vector):
        scale = float(np.real(scale))
    return unit, scale
