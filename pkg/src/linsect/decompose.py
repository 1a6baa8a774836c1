"""Certified low-rank decompositions T = sum_a v_a (x) w_a with v_a on a variety.

The column space of the flattened tensor is intersected with the variety;
when the intersection step certifies exactly rank-many points, bilinear
dual functionals to those points read off the co-factors, and the rebuilt
tensor is checked against the input.  Specializations cover order-3 and
order-m tensor rank (grouping modes into two blocks), Waring rank via the
multiplicity-weighted symmetric flattening, and rank-(r,r,1) block terms.

Every success carries the intersection's uniqueness certificate; anything
that cannot be certified raises instead of returning a near-miss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import symtensor as st
from .errors import (
    DegreeMismatch,
    InvalidSpec,
    NonProductW,
    NotSymmetric,
    NotUnique,
    RankMismatch,
)
from .intersect import (
    ELEMENTS,
    TRIVIAL,
    Subspace,
    UniquenessCertificate,
    intersect_subspace,
)
from .numlin import (
    DEFAULT_TOL,
    TolerancePolicy,
    canonicalize,
    column_space_basis,
    numerical_rank,
    pseudoinverse,
)
from .seeding import child_seed
from .validation import check_matrix, check_tensor, field_of
from .varieties import VarietySpec, generators

__all__ = [
    "VarietyDecomposition",
    "TensorDecomposition",
    "WaringDecomposition",
    "BlockTermDecomposition",
    "variety_decompose",
    "tensor_decompose",
    "waring_decompose",
    "block_term_decompose",
    "decomposition_to_json",
]


@dataclass(frozen=True)
class VarietyDecomposition:
    """T = sum_a scales[a] * points[a] (x) cofactors[a], all factors unit."""

    points: tuple
    cofactors: tuple
    scales: np.ndarray
    residual: float
    certificate: UniquenessCertificate

    @property
    def rank(self) -> int:
        return len(self.points)

    def reconstruct(self) -> np.ndarray:
        out = 0
        for scale, v, w in zip(self.scales, self.points, self.cofactors):
            out = out + scale * np.outer(v, w)
        return out


@dataclass(frozen=True)
class TensorDecomposition:
    """T = sum_a weights[a] * factors[0][:,a] (x) ... (x) factors[m-1][:,a]."""

    factors: tuple  # one (n_k, R) matrix per mode, unit canonical columns
    weights: np.ndarray
    residual: float
    certificate: UniquenessCertificate

    @property
    def rank(self) -> int:
        return len(self.weights)

    def reconstruct(self) -> np.ndarray:
        shape = tuple(f.shape[0] for f in self.factors)
        out = np.zeros(shape, dtype=np.result_type(*[f.dtype for f in self.factors]))
        for a in range(self.rank):
            term = self.weights[a]
            for f in self.factors:
                term = np.multiply.outer(term, f[:, a])
            out += term
        return out


@dataclass(frozen=True)
class WaringDecomposition:
    """T = sum_a weights[a] * vectors[a]^{(x)order}, vectors unit canonical."""

    order: int
    vectors: tuple
    weights: np.ndarray
    residual: float
    certificate: UniquenessCertificate

    @property
    def rank(self) -> int:
        return len(self.vectors)

    def reconstruct(self) -> np.ndarray:
        n = self.vectors[0].shape[0]
        out = np.zeros((n,) * self.order, dtype=np.result_type(self.weights, *self.vectors))
        for alpha, v in zip(self.weights, self.vectors):
            term = np.array(alpha)
            for _ in range(self.order):
                term = np.multiply.outer(term, v)
            out += term
        return out


@dataclass(frozen=True)
class BlockTermDecomposition:
    """T = sum_a scales[a] * slabs[a] (x) vectors[a] with rank-r slabs."""

    slabs: tuple
    vectors: tuple
    scales: np.ndarray
    slab_rank_ratios: tuple
    residual: float
    certificate: UniquenessCertificate

    @property
    def rank(self) -> int:
        return len(self.slabs)

    def reconstruct(self) -> np.ndarray:
        n1, n2 = self.slabs[0].shape
        n3 = self.vectors[0].shape[0]
        out = np.zeros((n1, n2, n3), dtype=np.result_type(self.scales, *self.slabs))
        for scale, slab, w in zip(self.scales, self.slabs, self.vectors):
            out += scale * np.multiply.outer(slab, w)
        return out


def variety_decompose(
    matrix,
    spec: VarietySpec,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> VarietyDecomposition:
    """Unique decomposition of a matrix V (x) W with first factors on a variety.

    Requires an irreducible (single-component) variety.  Raises NotUnique
    when the intersection step cannot certify, RankMismatch when the number
    of certified points differs from the numerical rank.
    """
    T = check_matrix(matrix)
    components = generators(spec)
    if len(components) != 1:
        raise InvalidSpec("variety decompositions need an irreducible (1-component) variety")
    system = components[0]
    if system.n != T.shape[0]:
        raise DegreeMismatch(
            f"matrix has {T.shape[0]} rows but the variety lives in F^{system.n}"
        )
    rank = numerical_rank(T, tol)
    if rank == 0:
        raise RankMismatch("the zero tensor has no decomposition to certify")
    basis = column_space_basis(T, tol)
    result = intersect_subspace(
        Subspace(basis), system, child_seed(seed, "column-space"), tol
    )
    if result.status == TRIVIAL:
        raise NotUnique("no variety points found in the column space")
    if result.status != ELEMENTS:
        raise NotUnique(f"intersection failed at {result.stage}: {result.reason}")
    if len(result.elements) != rank:
        raise RankMismatch(
            f"certified {len(result.elements)} variety points but the tensor has rank {rank}"
        )
    point_matrix = np.column_stack([np.asarray(v) for v in result.elements])
    duals = pseudoinverse(point_matrix, tol)  # rows pair bilinearly with the points
    cofactor_rows = duals @ T
    rebuilt = point_matrix @ cofactor_rows
    residual = float(np.linalg.norm(rebuilt - T) / np.linalg.norm(T))
    if residual > tol.residual_tol:
        raise NotUnique(f"reconstruction residual {residual:.3e} exceeds tolerance")

    scales = []
    cofactors = []
    for a in range(rank):
        w_unit, w_scale = canonicalize(cofactor_rows[a])
        cofactors.append(w_unit)
        scales.append(w_scale)
    order = np.argsort([-abs(s) for s in scales], kind="stable")
    points = tuple(np.asarray(result.elements[a]) for a in order)
    cofactors = tuple(cofactors[a] for a in order)
    scales = np.asarray([scales[a] for a in order])
    return VarietyDecomposition(
        points=points,
        cofactors=cofactors,
        scales=scales,
        residual=residual,
        certificate=result.uniqueness_certificate,
    )


def _split_product(vector: np.ndarray, dims: tuple[int, ...], tol: TolerancePolicy):
    """Factor a product tensor into unit legs: vector = scale * (x) legs.

    Returns (legs, scale, worst_tail) where worst_tail is the largest
    sigma_2/sigma_1 ratio seen across the successive rank-1 splits.
    """
    legs = []
    worst = 0.0
    current = np.asarray(vector)
    for k in range(len(dims) - 1):
        matrix = current.reshape(dims[k], -1)
        u, sigma, vh = np.linalg.svd(matrix, full_matrices=False)
        if sigma.size > 1 and sigma[0] > 0:
            worst = max(worst, float(sigma[1] / sigma[0]))
        leg, leg_phase = canonicalize(u[:, 0])
        legs.append(leg)
        current = leg_phase * sigma[0] * vh[0]
    last, scale = canonicalize(current)
    legs.append(last)
    return legs, scale, worst


def _normalize_grouping(ndim: int, grouping):
    if grouping is None:
        head = tuple(range(math.ceil(ndim / 2)))
        return head, tuple(range(len(head), ndim))
    group1, group2 = (tuple(int(i) for i in g) for g in grouping)
    if sorted(group1 + group2) != list(range(ndim)):
        raise InvalidSpec(f"grouping {grouping!r} is not a partition of the {ndim} modes")
    if len(group1) < 2:
        raise InvalidSpec("the variety-side group needs at least 2 modes")
    if len(group2) < 1:
        raise InvalidSpec("the co-factor group must be nonempty")
    return group1, group2


def tensor_decompose(
    tensor,
    grouping=None,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> TensorDecomposition:
    """Unique tensor rank decomposition of an order >= 3 tensor.

    Modes are split into a variety-side group (default the first
    ceil(m/2)) and a co-factor group; the variety side is matched against
    product tensors.  For order 3 the co-factor is a plain vector; for
    higher orders each co-factor must itself factor as a product tensor
    (NonProductW otherwise).
    """
    T = check_tensor(tensor)
    m = T.ndim
    if m < 3:
        raise InvalidSpec(f"need an order >= 3 tensor, got order {m}")
    group1, group2 = _normalize_grouping(m, grouping)
    perm = group1 + group2
    permuted = np.transpose(T, perm)
    dims1 = tuple(T.shape[i] for i in group1)
    dims2 = tuple(T.shape[i] for i in group2)
    flat = permuted.reshape(int(np.prod(dims1)), int(np.prod(dims2)))
    field = field_of(T)
    if len(dims1) == 2:
        spec = VarietySpec.determinantal(dims1[0], dims1[1], 1, field)
    else:
        spec = VarietySpec.segre(dims1, field)
    dec = variety_decompose(flat, spec, seed, tol)

    factor_columns = [[] for _ in range(m)]
    weights = []
    for a in range(dec.rank):
        legs1, scale1, tail1 = _split_product(dec.points[a], dims1, tol)
        if tail1 > tol.residual_tol:
            raise NonProductW(
                f"variety-side factor {a} is not a product tensor (tail {tail1:.3e})"
            )
        if len(dims2) == 1:
            legs2, scale2 = [dec.cofactors[a]], 1.0
        else:
            legs2, scale2, tail2 = _split_product(dec.cofactors[a], dims2, tol)
            if tail2 > tol.residual_tol:
                raise NonProductW(
                    f"co-factor {a} is not a product tensor (tail {tail2:.3e})"
                )
        legs = legs1 + list(legs2)
        weights.append(dec.scales[a] * scale1 * scale2)
        for mode, leg in zip(perm, legs):
            factor_columns[mode].append(leg)

    factors = tuple(np.column_stack(cols) for cols in factor_columns)
    weights = np.asarray(weights)
    out = TensorDecomposition(
        factors=factors,
        weights=weights,
        residual=0.0,
        certificate=dec.certificate,
    )
    residual = float(np.linalg.norm(out.reconstruct() - T) / np.linalg.norm(T))
    if residual > tol.residual_tol:
        raise NotUnique(f"full reconstruction residual {residual:.3e} exceeds tolerance")
    return TensorDecomposition(
        factors=factors, weights=weights, residual=residual, certificate=dec.certificate
    )


def _symmetry_defect(T: np.ndarray) -> float:
    worst = 0.0
    norm = np.linalg.norm(T)
    if norm == 0.0:
        return 0.0
    for k in range(T.ndim - 1):
        axes = list(range(T.ndim))
        axes[k], axes[k + 1] = axes[k + 1], axes[k]
        worst = max(worst, float(np.linalg.norm(T - np.transpose(T, axes)) / norm))
    return worst


def _symmetric_flattening(T: np.ndarray, m1: int, m2: int) -> np.ndarray:
    """Multiplicity-weighted flattening S^m -> S^{m1} (x) S^{m2} (an isometry)."""
    n = T.shape[0]
    rows_idx = st._index_array(n, m1)
    cols_idx = st._index_array(n, m2)
    w1 = st._sqrt_multiplicities(n, m1)
    w2 = st._sqrt_multiplicities(n, m2)
    row_codes = st._encode(rows_idx, n)
    col_codes = st._encode(cols_idx, n)
    flat = T.reshape(-1)
    codes = row_codes[:, None] * (n**m2) + col_codes[None, :]
    return (w1[:, None] * w2[None, :]) * flat[codes]


def _veronese_direction(point: np.ndarray, n: int, m1: int,
                        tol: TolerancePolicy) -> np.ndarray:
    """Recover v (unit, canonical) from a scaled compressed power point."""
    unscaled = point / st._sqrt_multiplicities(n, m1)
    full = st.to_full(st.SymTensor(n, m1, unscaled))
    flat = full.reshape(n, -1)
    if flat.shape[0] == flat.shape[1]:
        values, vectors = np.linalg.eig(flat.astype(np.complex128, copy=False))
        v = vectors[:, int(np.argmax(np.abs(values)))]
    else:
        u, _, _ = np.linalg.svd(flat, full_matrices=False)
        v = u[:, 0]
    return canonicalize(v)[0]


def waring_decompose(
    tensor,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> WaringDecomposition:
    """Unique decomposition of a symmetric tensor into weighted powers.

    The multiplicity-weighted flattening of T is decomposed over the
    variety of symmetric powers; each certified point yields a direction
    via its dominant eigenvector, and the weights come from a least-squares
    fit in the isometric compressed coordinates.
    """
    T = check_tensor(tensor)
    m = T.ndim
    n = T.shape[0]
    if m < 3:
        raise InvalidSpec(f"need an order >= 3 symmetric tensor, got order {m}")
    if T.shape != (n,) * m:
        raise InvalidSpec(f"symmetric tensors must be cubic, got shape {T.shape}")
    defect = _symmetry_defect(T)
    if defect > tol.residual_tol:
        raise NotSymmetric(f"symmetry defect {defect:.3e} exceeds tolerance")
    m1 = math.ceil(m / 2)
    m2 = m - m1
    field = field_of(T)
    flattening = _symmetric_flattening(T, m1, m2)
    spec = VarietySpec.veronese(n, m1, field)
    dec = variety_decompose(flattening, spec, seed, tol)

    vectors = tuple(_veronese_direction(p, n, m1, tol) for p in dec.points)
    sqrt_w = st._sqrt_multiplicities(n, m)
    columns = np.column_stack([sqrt_w * st.sym_power(v, m).coeffs for v in vectors])
    target = sqrt_w * st.from_full(T).coeffs
    weights, *_ = np.linalg.lstsq(columns, target, rcond=None)
    residual = float(np.linalg.norm(columns @ weights - target) / np.linalg.norm(target))
    if residual > tol.residual_tol:
        raise NotUnique(f"power reconstruction residual {residual:.3e} exceeds tolerance")
    if field == "R":
        weights = np.real(weights)
    order = np.argsort(-np.abs(weights), kind="stable")
    return WaringDecomposition(
        order=m,
        vectors=tuple(vectors[a] for a in order),
        weights=weights[order],
        residual=residual,
        certificate=dec.certificate,
    )


def block_term_decompose(
    tensor,
    r: int,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> BlockTermDecomposition:
    """Unique rank-(r,r,1) block decomposition of an order-3 tensor."""
    T = check_tensor(tensor, ndim=3)
    n1, n2, n3 = T.shape
    if not 1 <= r < min(n1, n2):
        raise InvalidSpec(f"need 1 <= r < min(n1, n2) = {min(n1, n2)}, got r={r}")
    field = field_of(T)
    spec = VarietySpec.determinantal(n1, n2, r, field)
    dec = variety_decompose(T.reshape(n1 * n2, n3), spec, seed, tol)
    slabs = []
    ratios = []
    for point in dec.points:
        slab = np.asarray(point).reshape(n1, n2)
        sigma = np.linalg.svd(slab, compute_uv=False)
        ratios.append(float(sigma[r] / sigma[0]) if sigma.size > r else 0.0)
        slabs.append(slab)
    return BlockTermDecomposition(
        slabs=tuple(slabs),
        vectors=dec.cofactors,
        scales=dec.scales,
        slab_rank_ratios=tuple(ratios),
        residual=dec.residual,
        certificate=dec.certificate,
    )


def _certificate_to_json(cert: UniquenessCertificate) -> dict:
    return {
        "count": cert.count,
        "alignments": [float(a) for a in cert.alignments],
        "independence_sigma_min": cert.independence_sigma_min,
        "span_residual": cert.span_residual,
    }


def decomposition_to_json(dec, field: str) -> dict:
    """Uniform JSON: terms of unit factors with a scalar scale per term."""
    from .jsonio import scalar_to_json, vector_to_json

    terms = []
    if isinstance(dec, TensorDecomposition):
        shapes = [[int(f.shape[0])] for f in dec.factors]
        for a in range(dec.rank):
            terms.append(
                {
                    "factors": [vector_to_json(f[:, a], field) for f in dec.factors],
                    "scale": scalar_to_json(dec.weights[a], field),
                }
            )
        groups = [[k] for k in range(len(dec.factors))]
    elif isinstance(dec, WaringDecomposition):
        n = int(dec.vectors[0].shape[0])
        shapes = [[n]] * dec.order
        for a in range(dec.rank):
            terms.append(
                {
                    "factors": [vector_to_json(dec.vectors[a], field)] * dec.order,
                    "scale": scalar_to_json(dec.weights[a], field),
                }
            )
        groups = [[k] for k in range(dec.order)]
    elif isinstance(dec, BlockTermDecomposition):
        n1, n2 = dec.slabs[0].shape
        n3 = int(dec.vectors[0].shape[0])
        shapes = [[n1, n2], [n3]]
        for a in range(dec.rank):
            terms.append(
                {
                    "factors": [
                        vector_to_json(dec.slabs[a].reshape(-1), field),
                        vector_to_json(dec.vectors[a], field),
                    ],
                    "scale": scalar_to_json(dec.scales[a], field),
                }
            )
        groups = [[0, 1], [2]]
    elif isinstance(dec, VarietyDecomposition):
        shapes = [[int(dec.points[0].shape[0])], [int(dec.cofactors[0].shape[0])]]
        for a in range(dec.rank):
            terms.append(
                {
                    "factors": [
                        vector_to_json(dec.points[a], field),
                        vector_to_json(dec.cofactors[a], field),
                    ],
                    "scale": scalar_to_json(dec.scales[a], field),
                }
            )
        groups = [[0], [1]]
    else:
        raise TypeError(f"cannot serialize {type(dec)!r}")
    return {
        "terms": terms,
        "factor_shapes": shapes,
        "mode_groups": groups,
        "residual": dec.residual,
        "certificate": _certificate_to_json(dec.certificate),
    }
