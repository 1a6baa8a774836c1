"""Certified computation of the intersection of a subspace with a variety.

Given a basis u_1..u_R of U in F^n and degree-d generators of a conic
variety X, the coefficient matrix M stacks phi(u_{a_1} v ... v u_{a_d})
over all non-decreasing index tuples a.  Its kernel parameterizes
S^d(U) intersect I_d-perp inside the small C(R+d-1, d)-dimensional
coefficient space:

* an empty kernel certifies U intersect X = {0} (a degree-d linear-algebra
  certificate; over the reals it is sound but possibly incomplete,
  recorded in the result's field_complete flag);
* otherwise a kernel basis {P_1..P_s} is stacked into the 3-mode tensor
  sum_i e_i (x) P_i and simultaneously diagonalized; terms whose third
  factor aligns with v^{(x)(d-1)} certify that v_1..v_s are the only
  elements of U intersect X up to scale.

Reducible varieties run per irreducible component, avoiding the degree
blow-up of multiplying the components' generators.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import symtensor as st
from .errors import DegenerateBasis, DegreeMismatch
from .numlin import (
    DEFAULT_TOL,
    TolerancePolicy,
    canonicalize,
    column_space_basis,
    kernel_basis,
    numerical_rank,
)
from .seeding import child_seed
from .simdiag import simultaneous_diagonalize
from .validation import COMPLEX, check_matrix, field_of
from .varieties import PolySystem
from .jsonio import matrix_from_json, matrix_to_json

__all__ = [
    "Subspace",
    "KernelCertificate",
    "UniquenessCertificate",
    "IntersectionResult",
    "ComponentsResult",
    "intersect_subspace",
    "intersect_components",
    "verify_certificate",
    "rank_bound",
    "subspace_to_json",
    "subspace_from_json",
]

TRIVIAL = "trivial"
ELEMENTS = "elements"
FAIL = "fail"


@dataclass(frozen=True)
class Subspace:
    """Subspace of F^n given by an ordered basis (columns)."""

    basis: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "basis", check_matrix(self.basis, name="basis"))

    @property
    def ambient(self) -> int:
        return self.basis.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def field(self) -> str:
        return field_of(self.basis)

    @classmethod
    def from_vectors(cls, vectors) -> "Subspace":
        return cls(np.column_stack([np.asarray(v) for v in vectors]))


@dataclass(frozen=True)
class KernelCertificate:
    """Witness that the lifted coefficient matrix has full column rank."""

    lift_dim: int
    matrix_sha256: str
    sigma_min: float
    sigma_max: float


@dataclass(frozen=True)
class UniquenessCertificate:
    """Witness that the kernel is spanned by d-th powers of the outputs."""

    count: int
    alignments: tuple[float, ...]
    independence_sigma_min: float
    span_residual: float


@dataclass(frozen=True)
class IntersectionResult:
    """Outcome of one subspace/variety intersection run.

    status is "trivial", "elements" or "fail".  field_complete records
    whether the trivial certificate is also complete (true over C; over R
    a trivial verdict is sound but the converse implication may fail).
    """

    status: str
    elements: tuple = ()
    kernel_certificate: KernelCertificate | None = None
    uniqueness_certificate: UniquenessCertificate | None = None
    stage: str | None = None
    reason: str | None = None
    field_complete: bool = True

    @property
    def ok(self) -> bool:
        return self.status != FAIL


@dataclass(frozen=True)
class ComponentsResult:
    """Per-component outcomes plus the aggregate verdict."""

    status: str  # "trivial_all" | "found_elements" | "fail"
    elements: tuple
    per_component: tuple[IntersectionResult, ...]


def _lift_coefficient_matrix(subspace: Subspace, system: PolySystem, tol: TolerancePolicy):
    """Lift an orthonormalized basis of U and stack phi of each lift.

    Columns are rescaled by the exact norms of the lifted tensors (known
    in closed form for an orthonormal basis), so every column of the
    returned coefficient matrix has norm at most 1, with equality exactly
    off the kernel; the kernel test is then anchored at scale 1 instead of
    being relative to what may be pure floating-point noise.
    """
    if system.n != subspace.ambient:
        raise DegreeMismatch(
            f"system ambient {system.n} does not match subspace ambient {subspace.ambient}"
        )
    ortho = column_space_basis(subspace.basis, tol)
    if ortho.shape[1] < subspace.dim:
        raise DegenerateBasis(f"subspace basis has rank below {subspace.dim}")
    _, lifted = st.lift_matrix(ortho, system.d, tol)
    col_scale = np.sqrt(st._multiplicities(subspace.dim, system.d))
    coeff = np.asarray(system._phi_matrix @ lifted) * col_scale[None, :]
    return ortho, lifted, col_scale, coeff


def _fingerprint(matrix: np.ndarray) -> str:
    digest = hashlib.sha256()
    digest.update(str(matrix.shape).encode())
    digest.update(np.ascontiguousarray(matrix).tobytes())
    return digest.hexdigest()


def _power_flat(vector: np.ndarray, power: int) -> np.ndarray:
    """Row-major flattening of v^{(x)power}."""
    out = np.asarray(vector)
    for _ in range(power - 1):
        out = np.multiply.outer(out, vector).reshape(-1)
    return out


def _canonical_order(vectors) -> list:
    stacked = np.stack([np.concatenate([np.real(v), np.imag(v)]) for v in vectors])
    order = np.lexsort(np.round(stacked, 9).T[::-1])
    return [vectors[i] for i in order]


def _weighted_orthonormal(coeff_columns: np.ndarray, n: int, d: int,
                          tol: TolerancePolicy) -> np.ndarray:
    sqrtw = st._sqrt_multiplicities(n, d)
    return column_space_basis(coeff_columns * sqrtw[:, None], tol)


def _span_residual(a_basis: np.ndarray, b_basis: np.ndarray) -> float:
    """Spectral distance between two orthonormal column spans."""
    if a_basis.shape[1] != b_basis.shape[1]:
        return 1.0
    if a_basis.shape[1] == 0:
        return 0.0
    proj = b_basis @ (b_basis.conj().T @ a_basis)
    return float(np.linalg.norm(a_basis - proj, 2))


def intersect_subspace(
    subspace: Subspace,
    system: PolySystem,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> IntersectionResult:
    """Compute U intersect X for one irreducible component, with certificate.

    Returns a trivial certificate, the (certified unique) nonzero elements
    up to scale, or a Fail with its stage and reason.  Elements are unit
    vectors with the first significant coordinate positive real.
    """
    n, r = subspace.ambient, subspace.dim
    d = system.d
    field_complete = subspace.field == COMPLEX and system.field == COMPLEX

    ortho, lifted, col_scale, coeff = _lift_coefficient_matrix(subspace, system, tol)
    kernel = kernel_basis(coeff, tol, scale_anchor=1.0)
    s = kernel.shape[1]
    sigma = np.linalg.svd(coeff, compute_uv=False) if coeff.size else np.zeros(1)

    if s == 0:
        certificate = KernelCertificate(
            lift_dim=coeff.shape[1],
            matrix_sha256=_fingerprint(coeff),
            sigma_min=float(sigma.min()),
            sigma_max=float(sigma.max()),
        )
        return IntersectionResult(
            status=TRIVIAL, kernel_certificate=certificate, field_complete=field_complete
        )
    if s > r:
        return IntersectionResult(
            status=FAIL, stage="kernel", reason="too_many_kernel_elements",
            field_complete=field_complete,
        )

    # Mapping the kernel back through the column scaling makes P_1..P_s an
    # orthonormal family in S^d(F^n).
    basis_coeffs = lifted @ (kernel * col_scale[:, None])
    tensor = np.stack(
        [st.mode_matrix(st.SymTensor(n, d, basis_coeffs[:, i])) for i in range(s)]
    )
    outcome = simultaneous_diagonalize(tensor, child_seed(seed, "lifted-simdiag"), tol)
    if not outcome.ok:
        return IntersectionResult(
            status=FAIL, stage="simdiag", reason=outcome.failure,
            field_complete=field_complete,
        )
    if len(outcome.terms) != s:
        return IntersectionResult(
            status=FAIL, stage="simdiag", reason="term_count_mismatch",
            field_complete=field_complete,
        )

    alignments = []
    vectors = []
    z_vectors = []
    for z_vec, v_vec, w_vec in outcome.terms:
        v_power = _power_flat(v_vec, d - 1)
        denom = np.linalg.norm(w_vec) * np.linalg.norm(v_power)
        alignment = float(abs(np.vdot(w_vec, v_power)) / denom) if denom else 0.0
        alignments.append(alignment)
        vectors.append(v_vec)
        z_vectors.append(z_vec)
    if min(alignments) < 1.0 - tol.residual_tol:
        return IntersectionResult(
            status=FAIL, stage="alignment", reason="kernel_not_spanned_by_powers",
            field_complete=field_complete,
        )
    if numerical_rank(np.column_stack(z_vectors), tol) < s:
        return IntersectionResult(
            status=FAIL, stage="independence", reason="first_factors_dependent",
            field_complete=field_complete,
        )
    v_matrix = np.column_stack(vectors)
    v_sigma = np.linalg.svd(v_matrix, compute_uv=False)
    if numerical_rank(v_matrix, tol) < s:
        return IntersectionResult(
            status=FAIL, stage="independence", reason="elements_dependent",
            field_complete=field_complete,
        )

    # The certified elements must live in U itself.
    u_basis = ortho
    for v_vec in vectors:
        residual = np.linalg.norm(v_vec - u_basis @ (u_basis.conj().T @ v_vec))
        if residual > tol.residual_tol * np.linalg.norm(v_vec):
            return IntersectionResult(
                status=FAIL, stage="postcheck", reason="element_outside_subspace",
                field_complete=field_complete,
            )

    kernel_span = _weighted_orthonormal(basis_coeffs, n, d, tol)
    power_columns = np.column_stack([st.sym_power(v, d).coeffs for v in vectors])
    power_span = _weighted_orthonormal(power_columns, n, d, tol)
    span_residual = max(
        _span_residual(kernel_span, power_span), _span_residual(power_span, kernel_span)
    )
    if span_residual > tol.residual_tol:
        return IntersectionResult(
            status=FAIL, stage="postcheck", reason="kernel_span_mismatch",
            field_complete=field_complete,
        )

    elements = _canonical_order([canonicalize(v)[0] for v in vectors])
    certificate = UniquenessCertificate(
        count=s,
        alignments=tuple(sorted(alignments)),
        independence_sigma_min=float(v_sigma.min()),
        span_residual=span_residual,
    )
    return IntersectionResult(
        status=ELEMENTS,
        elements=tuple(elements),
        uniqueness_certificate=certificate,
        field_complete=field_complete,
    )


def _dedup_elements(elements, tol: TolerancePolicy):
    unique = []
    for v in elements:
        if all(abs(np.vdot(v, u)) < 1.0 - tol.residual_tol for u in unique):
            unique.append(v)
    return unique


def intersect_components(
    subspace: Subspace,
    components,
    seed: int = 0,
    tol: TolerancePolicy = DEFAULT_TOL,
    threads: int = 1,
) -> ComponentsResult:
    """Run the intersection per irreducible component and aggregate.

    trivial_all when every component is trivial; found_elements with the
    deduplicated union when any component certifies elements; fail
    otherwise.  Components may run concurrently; results merge in
    component order, so the output is deterministic.
    """
    components = list(components)
    jobs = [(comp, child_seed(seed, "component", idx)) for idx, comp in enumerate(components)]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda job: intersect_subspace(subspace, job[0], job[1], tol), jobs)
            )
    else:
        results = [intersect_subspace(subspace, comp, s, tol) for comp, s in jobs]

    if all(res.status == TRIVIAL for res in results):
        return ComponentsResult("trivial_all", (), tuple(results))
    found = [v for res in results if res.status == ELEMENTS for v in res.elements]
    if found:
        unique = _dedup_elements(found, tol)
        return ComponentsResult("found_elements", tuple(unique), tuple(results))
    return ComponentsResult("fail", (), tuple(results))


def verify_certificate(
    result: IntersectionResult,
    subspace: Subspace,
    system: PolySystem,
    tol: TolerancePolicy = DEFAULT_TOL,
) -> bool:
    """Recompute every certified quantity from scratch (within 10x tolerances).

    Fail results make no claim and verify vacuously.
    """
    slack = 10.0
    if result.status == FAIL:
        return True
    try:
        ortho, lifted, col_scale, coeff = _lift_coefficient_matrix(subspace, system, tol)
    except (DegreeMismatch, DegenerateBasis, OverflowError):
        return False

    if result.status == TRIVIAL:
        cert = result.kernel_certificate
        if cert is None or cert.lift_dim != coeff.shape[1]:
            return False
        if _fingerprint(coeff) != cert.matrix_sha256:
            return False
        sigma = np.linalg.svd(coeff, compute_uv=False) if coeff.size else np.zeros(1)
        if abs(float(sigma.min()) - cert.sigma_min) > slack * tol.residual_tol * max(
            cert.sigma_max, 1.0
        ):
            return False
        return kernel_basis(coeff, tol, scale_anchor=1.0).shape[1] == 0

    cert = result.uniqueness_certificate
    if cert is None or cert.count != len(result.elements):
        return False
    kernel = kernel_basis(coeff, tol, scale_anchor=1.0)
    if kernel.shape[1] != len(result.elements):
        return False
    n, d = system.n, system.d
    u_basis = ortho
    for v in result.elements:
        v = np.asarray(v)
        norm = np.linalg.norm(v)
        if norm == 0.0:
            return False
        values = system.phi(st.sym_power(v, d).coeffs)
        if values.size and np.max(np.abs(values)) > slack * tol.residual_tol * norm**d:
            return False
        residual = np.linalg.norm(v - u_basis @ (u_basis.conj().T @ v))
        if residual > slack * tol.residual_tol * norm:
            return False
    v_matrix = np.column_stack([np.asarray(v) for v in result.elements])
    if numerical_rank(v_matrix, tol) < len(result.elements):
        return False
    kernel_span = _weighted_orthonormal(lifted @ (kernel * col_scale[:, None]), n, d, tol)
    power_columns = np.column_stack(
        [st.sym_power(np.asarray(v), d).coeffs for v in result.elements]
    )
    power_span = _weighted_orthonormal(power_columns, n, d, tol)
    residual = max(
        _span_residual(kernel_span, power_span), _span_residual(power_span, kernel_span)
    )
    return residual <= slack * tol.residual_tol


def rank_bound(system: PolySystem) -> int:
    """Largest generic subspace dimension certified from (p, d, n)."""
    denominator = math.factorial(system.d - 1) * math.comb(
        system.n + system.d - 2, system.d - 1
    )
    return system.p // denominator


def subspace_to_json(subspace: Subspace) -> dict:
    return {
        "field": subspace.field,
        "ambient": subspace.ambient,
        "basis": matrix_to_json(subspace.basis, subspace.field),
    }


def subspace_from_json(payload: dict) -> Subspace:
    field = payload.get("field", COMPLEX)
    basis = matrix_from_json(payload["basis"], field)
    ambient = payload.get("ambient")
    if ambient is not None and basis.shape[0] != ambient:
        raise ValueError(
            f"basis columns have length {basis.shape[0]} but ambient is {ambient}"
        )
    return Subspace(basis)
