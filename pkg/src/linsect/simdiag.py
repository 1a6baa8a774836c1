"""Simultaneous diagonalization of a 3-mode tensor from two random slices.

Given T with a decomposition sum_a u_a (x) v_a (x) w_a whose second and
third factor families are linearly independent and whose first factors are
pairwise non-parallel, two random functionals f, g on the first mode
produce matrices whose eigen-structure exposes the factors: the nonzero
eigenvalues of T(f) T(g)^+ are f(u_a)/g(u_a) with eigenvectors v_a, and
the transposed product (T(f)^+ T(g))^T has the reciprocal eigenvalues with
eigenvectors w_a.  Matching reciprocals pairs the families, dual
functionals to {v_a (x) w_a} then recover u_a, and the rebuilt tensor is
checked against T.

Transient spectral failures (repeated eigenvalues, unmatched reciprocals,
an over-tolerance rebuild) trigger a redraw of f, g up to max_retries; a
parallel first-factor family is a property of T and fails immediately.

Very wide second or third modes are first compressed onto an orthonormal
basis containing the mode's fiber span (an exact change of basis that
leaves the algorithm's spectra untouched); factors are mapped back and
the final residual is computed in the original coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EigenFailure
from .numlin import (
    DEFAULT_TOL,
    TolerancePolicy,
    canonicalize,
    eig_pairs,
    numerical_rank,
    pseudoinverse,
)
from .seeding import gaussian, rng_for
from .validation import check_tensor, field_of

__all__ = [
    "SimDiagOutcome",
    "simultaneous_diagonalize",
    "REPEATED_EIGENVALUES",
    "RECIPROCAL_MISMATCH",
    "PARALLEL_FIRST_FACTORS",
    "EIG_FAILURE",
    "RESIDUAL_TOO_LARGE",
]

REPEATED_EIGENVALUES = "repeated_eigenvalues"
RECIPROCAL_MISMATCH = "reciprocal_mismatch"
PARALLEL_FIRST_FACTORS = "parallel_first_factors"
EIG_FAILURE = "eig_failure"
RESIDUAL_TOO_LARGE = "residual_too_large"

_TRANSIENT = (REPEATED_EIGENVALUES, RECIPROCAL_MISMATCH, RESIDUAL_TOO_LARGE)


@dataclass
class SimDiagOutcome:
    """Result of one simultaneous-diagonalization run.

    terms: list of (u, v, w) with v, w unit-normalized (first significant
        entry positive real) and the scale absorbed into u.
    residual: ||T - sum u (x) v (x) w|| / ||T|| on success.
    failure: None on success, else one of the failure-reason constants.
    """

    terms: list | None
    residual: float | None
    failure: str | None

    @property
    def ok(self) -> bool:
        return self.failure is None

    @classmethod
    def fail(cls, reason: str) -> "SimDiagOutcome":
        return cls(terms=None, residual=None, failure=reason)


def _compression_basis(unfolding: np.ndarray, max_dim: int = 512) -> np.ndarray | None:
    """Orthonormal columns spanning (at least) the mode's fiber span.

    None when the mode is already small enough that compressing would not
    pay.  QR may keep directions beyond the numerical rank; the subsequent
    change of basis stays exact either way, so no rank decision is needed.
    """
    dim, codim = unfolding.shape
    if dim <= max_dim or dim <= codim:
        return None
    q, _ = np.linalg.qr(unfolding)
    return q


def _match_reciprocals(lams: np.ndarray, mus: np.ndarray, tol: TolerancePolicy):
    """Greedy nearest-match of mus against 1/lams; None on any miss."""
    targets = 1.0 / lams
    threshold = tol.eig_gap_rel_tol * np.max(np.abs(targets))
    available = list(range(len(mus)))
    chosen = []
    for target in targets:
        if not available:
            return None
        errors = np.abs(mus[available] - target)
        best = int(np.argmin(errors))
        if errors[best] > threshold:
            return None
        chosen.append(available.pop(best))
    return chosen


def _rebuild(terms, shape) -> np.ndarray:
    out = np.zeros(shape, dtype=np.complex128)
    for u, v, w in terms:
        out += np.multiply.outer(u, np.multiply.outer(v, w))
    return out


def simultaneous_diagonalize(
    tensor, seed: int = 0, tol: TolerancePolicy = DEFAULT_TOL
) -> SimDiagOutcome:
    """Recover {u_a (x) v_a (x) w_a} from a 3-mode tensor, or Fail."""
    T = check_tensor(tensor, ndim=3)
    n1, n2, n3 = T.shape
    if min(n1, n2, n3) < 1:
        raise ValueError(f"tensor modes must be nonempty, got shape {T.shape}")
    field = field_of(T)
    norm_T = float(np.linalg.norm(T))
    if norm_T == 0.0:
        return SimDiagOutcome(terms=[], residual=0.0, failure=None)

    # Orthonormal compressions of wide modes 2 and 3 (spectra unchanged).
    q2 = _compression_basis(T.transpose(1, 0, 2).reshape(n2, n1 * n3))
    q3 = _compression_basis(T.transpose(2, 0, 1).reshape(n3, n1 * n2))
    core = T
    if q2 is not None:
        core = np.einsum("ijk,ja->iak", core, q2.conj(), optimize=True)
    if q3 is not None:
        core = np.einsum("ijk,kb->ijb", core, q3.conj(), optimize=True)
    r2, r3 = core.shape[1], core.shape[2]

    rng = rng_for(seed, "simdiag")
    failure = RESIDUAL_TOO_LARGE
    for _ in range(tol.max_retries):
        f = gaussian(rng, n1, field)
        g = gaussian(rng, n1, field)
        slice_f = np.tensordot(f, core, axes=(0, 0))
        slice_g = np.tensordot(g, core, axes=(0, 0))
        try:
            product = slice_f @ pseudoinverse(slice_g, tol)
            rank = numerical_rank(product, tol)
            if rank == 0:
                failure = REPEATED_EIGENVALUES
                continue
            lam_all, vec_all = eig_pairs(product)
            order = np.argsort(-np.abs(lam_all))[:rank]
            lams = lam_all[order]
            v_red = vec_all[:, order]
            gaps = np.abs(lams[:, None] - lams[None, :])[np.triu_indices(rank, 1)]
            if gaps.size and gaps.min() < tol.eig_gap_rel_tol * np.abs(lams).max():
                failure = REPEATED_EIGENVALUES
                continue
            # Transposed product: eigenvalues 1/lam, eigenvectors the
            # third-mode factors.
            mirror = (pseudoinverse(slice_f, tol) @ slice_g).T
            mu_all, wvec_all = eig_pairs(mirror)
            matched = _match_reciprocals(lams, mu_all, tol)
            if matched is None:
                failure = RECIPROCAL_MISMATCH
                continue
            w_red = wvec_all[:, matched]
        except EigenFailure:
            return SimDiagOutcome.fail(EIG_FAILURE)

        # Dual functionals to {v_a (x) w_a}: rows of the pseudoinverse pair
        # bilinearly, so u_a = T applied to them.
        pairs = np.einsum("ja,ka->jka", v_red, w_red).reshape(r2 * r3, rank)
        duals = pseudoinverse(pairs, tol)
        u_vecs = core.reshape(n1, r2 * r3) @ duals.T

        parallel = False
        for a in range(rank):
            for b in range(a + 1, rank):
                if numerical_rank(np.column_stack([u_vecs[:, a], u_vecs[:, b]]), tol) < 2:
                    parallel = True
        if parallel:
            return SimDiagOutcome.fail(PARALLEL_FIRST_FACTORS)
        if numerical_rank(v_red, tol) < rank or numerical_rank(w_red, tol) < rank:
            failure = RECIPROCAL_MISMATCH
            continue

        terms = []
        for a in range(rank):
            v_full, v_scale = canonicalize(q2 @ v_red[:, a] if q2 is not None else v_red[:, a])
            w_full, w_scale = canonicalize(q3 @ w_red[:, a] if q3 is not None else w_red[:, a])
            terms.append((u_vecs[:, a] * (v_scale * w_scale), v_full, w_full))
        residual = float(np.linalg.norm(_rebuild(terms, T.shape) - T)) / norm_T
        if residual > tol.residual_tol:
            failure = RESIDUAL_TOO_LARGE
            continue
        return SimDiagOutcome(terms=terms, residual=residual, failure=None)
    return SimDiagOutcome.fail(failure)
