"""scikit-learn style estimators wrapping the functional core.

Each estimator stores its configuration in __init__ (so get_params /
set_params / clone work), does the work in fit, and exposes results as
trailing-underscore attributes.  Sample-style inputs follow the sklearn
row convention: a subspace is passed as an (n_vectors, n_features) array
whose rows span it.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .decompose import (
    block_term_decompose,
    tensor_decompose,
    variety_decompose,
    waring_decompose,
)
from .intersect import Subspace, intersect_components, verify_certificate
from .numlin import DEFAULT_TOL, TolerancePolicy
from .validation import check_matrix, check_tensor
from .varieties import VarietySpec, generators, membership, spec_from_json

__all__ = [
    "VarietyIntersection",
    "VarietyDecomposer",
    "TensorRankDecomposer",
    "WaringDecomposer",
    "BlockTermDecomposer",
]


def _as_spec(variety) -> VarietySpec:
    if isinstance(variety, VarietySpec):
        return variety
    if isinstance(variety, dict):
        return spec_from_json(variety)
    raise TypeError("variety must be a VarietySpec or its JSON dict form")


class _ToleranceMixin:
    def _tolerances(self) -> TolerancePolicy:
        return TolerancePolicy(
            rank_rel_tol=self.rank_rel_tol,
            residual_tol=self.residual_tol,
            eig_gap_rel_tol=self.eig_gap_rel_tol,
            max_retries=self.max_retries,
        )


class VarietyIntersection(BaseEstimator, _ToleranceMixin):
    """Certified intersection of a subspace with a conic variety.

    fit takes the subspace as rows; afterwards status_ is "trivial_all",
    "found_elements" or "fail", elements_ holds the certified intersection
    points (one per row), and result_ the full per-component record.
    predict marks which input rows lie in the fitted subspace's
    intersection with the variety.
    """

    def __init__(
        self,
        variety,
        *,
        seed: int = 0,
        threads: int = 1,
        rank_rel_tol: float = DEFAULT_TOL.rank_rel_tol,
        residual_tol: float = DEFAULT_TOL.residual_tol,
        eig_gap_rel_tol: float = DEFAULT_TOL.eig_gap_rel_tol,
        max_retries: int = DEFAULT_TOL.max_retries,
    ):
        self.variety = variety
        self.seed = seed
        self.threads = threads
        self.rank_rel_tol = rank_rel_tol
        self.residual_tol = residual_tol
        self.eig_gap_rel_tol = eig_gap_rel_tol
        self.max_retries = max_retries

    def fit(self, X, y=None):
        X = check_matrix(X, name="X")
        tol = self._tolerances()
        spec = _as_spec(self.variety)
        subspace = Subspace(X.T)
        result = intersect_components(
            subspace, generators(spec), seed=self.seed, tol=tol, threads=self.threads
        )
        self.n_features_in_ = X.shape[1]
        self.subspace_ = subspace
        self.result_ = result
        self.status_ = result.status
        self.elements_ = (
            np.vstack(result.elements) if result.elements else np.zeros((0, X.shape[1]), X.dtype)
        )
        self.is_trivial_ = result.status == "trivial_all"
        return self

    def verify(self) -> bool:
        """Re-derive every per-component certificate from scratch."""
        check_is_fitted(self, "result_")
        tol = self._tolerances()
        spec = _as_spec(self.variety)
        return all(
            verify_certificate(res, self.subspace_, comp, tol)
            for res, comp in zip(self.result_.per_component, generators(spec))
        )

    def predict(self, X) -> np.ndarray:
        """True per row iff the row is (numerically) in span(fit rows) and X."""
        check_is_fitted(self, "subspace_")
        X = check_matrix(X, name="X")
        tol = self._tolerances()
        spec = _as_spec(self.variety)
        basis = self.subspace_.basis
        q, _ = np.linalg.qr(basis)
        flags = []
        for row in X:
            norm = np.linalg.norm(row)
            if norm == 0.0:
                flags.append(True)
                continue
            in_span = (
                np.linalg.norm(row - q @ (q.conj().T @ row)) <= tol.residual_tol * norm
            )
            flags.append(bool(in_span and membership(spec, row, tol)))
        return np.asarray(flags)


class _DecomposerBase(BaseEstimator, _ToleranceMixin):
    def reconstruct(self) -> np.ndarray:
        check_is_fitted(self, "decomposition_")
        return self.decomposition_.reconstruct()


class VarietyDecomposer(_DecomposerBase):
    """Unique decomposition of a matrix into variety points times co-factors."""

    def __init__(
        self,
        variety,
        *,
        seed: int = 0,
        rank_rel_tol: float = DEFAULT_TOL.rank_rel_tol,
        residual_tol: float = DEFAULT_TOL.residual_tol,
        eig_gap_rel_tol: float = DEFAULT_TOL.eig_gap_rel_tol,
        max_retries: int = DEFAULT_TOL.max_retries,
    ):
        self.variety = variety
        self.seed = seed
        self.rank_rel_tol = rank_rel_tol
        self.residual_tol = residual_tol
        self.eig_gap_rel_tol = eig_gap_rel_tol
        self.max_retries = max_retries

    def fit(self, X, y=None):
        X = check_matrix(X, name="X")
        dec = variety_decompose(X, _as_spec(self.variety), self.seed, self._tolerances())
        self.decomposition_ = dec
        self.rank_ = dec.rank
        self.points_ = np.vstack(dec.points)
        self.cofactors_ = np.vstack(dec.cofactors)
        self.scales_ = dec.scales
        self.residual_ = dec.residual
        self.certificate_ = dec.certificate
        return self


class TensorRankDecomposer(_DecomposerBase):
    """Unique tensor rank decomposition for order >= 3 tensors."""

    def __init__(
        self,
        grouping=None,
        *,
        seed: int = 0,
        rank_rel_tol: float = DEFAULT_TOL.rank_rel_tol,
        residual_tol: float = DEFAULT_TOL.residual_tol,
        eig_gap_rel_tol: float = DEFAULT_TOL.eig_gap_rel_tol,
        max_retries: int = DEFAULT_TOL.max_retries,
    ):
        self.grouping = grouping
        self.seed = seed
        self.rank_rel_tol = rank_rel_tol
        self.residual_tol = residual_tol
        self.eig_gap_rel_tol = eig_gap_rel_tol
        self.max_retries = max_retries

    def fit(self, X, y=None):
        X = check_tensor(X, name="X")
        dec = tensor_decompose(X, self.grouping, self.seed, self._tolerances())
        self.decomposition_ = dec
        self.rank_ = dec.rank
        self.factors_ = list(dec.factors)
        self.weights_ = dec.weights
        self.residual_ = dec.residual
        self.certificate_ = dec.certificate
        return self


class WaringDecomposer(_DecomposerBase):
    """Unique weighted-power decomposition of a symmetric tensor."""

    def __init__(
        self,
        *,
        seed: int = 0,
        rank_rel_tol: float = DEFAULT_TOL.rank_rel_tol,
        residual_tol: float = DEFAULT_TOL.residual_tol,
        eig_gap_rel_tol: float = DEFAULT_TOL.eig_gap_rel_tol,
        max_retries: int = DEFAULT_TOL.max_retries,
    ):
        self.seed = seed
        self.rank_rel_tol = rank_rel_tol
        self.residual_tol = residual_tol
        self.eig_gap_rel_tol = eig_gap_rel_tol
        self.max_retries = max_retries

    def fit(self, X, y=None):
        X = check_tensor(X, name="X")
        dec = waring_decompose(X, self.seed, self._tolerances())
        self.decomposition_ = dec
        self.rank_ = dec.rank
        self.components_ = np.vstack(dec.vectors)
        self.weights_ = dec.weights
        self.residual_ = dec.residual
        self.certificate_ = dec.certificate
        return self


class BlockTermDecomposer(_DecomposerBase):
    """Unique rank-(r,r,1) block-term decomposition of an order-3 tensor."""

    def __init__(
        self,
        r: int = 1,
        *,
        seed: int = 0,
        rank_rel_tol: float = DEFAULT_TOL.rank_rel_tol,
        residual_tol: float = DEFAULT_TOL.residual_tol,
        eig_gap_rel_tol: float = DEFAULT_TOL.eig_gap_rel_tol,
        max_retries: int = DEFAULT_TOL.max_retries,
    ):
        self.r = r
        self.seed = seed
        self.rank_rel_tol = rank_rel_tol
        self.residual_tol = residual_tol
        self.eig_gap_rel_tol = eig_gap_rel_tol
        self.max_retries = max_retries

    def fit(self, X, y=None):
        X = check_tensor(X, ndim=3, name="X")
        dec = block_term_decompose(X, self.r, self.seed, self._tolerances())
        self.decomposition_ = dec
        self.rank_ = dec.rank
        self.slabs_ = list(dec.slabs)
        self.vectors_ = np.vstack(dec.vectors)
        self.scales_ = dec.scales
        self.slab_rank_ratios_ = dec.slab_rank_ratios
        self.residual_ = dec.residual
        self.certificate_ = dec.certificate
        return self
