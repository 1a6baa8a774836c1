"""Catalog of conic varieties with generator construction and sampling.

Each variety is cut out by homogeneous polynomials of one degree per
irreducible component.  Generators are stored as compressed dual
coordinates (one value per sorted monomial, conjugated), so the Hermitian
pairing with multiplicity weights is exactly polynomial evaluation:
phi(u)_j = <f_j, u> and f_j(v) = phi(v^{(x)d})_j.

Determinantal-style components are built exactly from minors; the Segre
and Veronese quadric systems are produced as the orthogonal complement of
a sampled span of squared variety points and validated against the exact
closed-form generator counts.  Veronese points live in sqrt-multiplicity
scaled coordinates, making the embedding of S^m(F^n) isometric so that
symmetric flattenings downstream preserve norms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from . import symtensor as st
from .errors import DegreeMismatch, InvalidSpec
from .numlin import DEFAULT_TOL, TolerancePolicy, kernel_basis
from .seeding import child_seed, gaussian, rng_for
from .validation import COMPLEX, check_field, check_vector, field_dtype
from .jsonio import vector_from_json, vector_to_json

__all__ = [
    "VarietySpec",
    "PolySystem",
    "generators",
    "component_counts",
    "ambient_dim",
    "apply_phi",
    "membership",
    "sample_point",
    "spec_to_json",
    "spec_from_json",
]

_KINDS = ("determinantal", "segre", "biseparable", "slice", "veronese", "custom")

# Fixed stream label: sampled generator systems are deterministic per spec.
_CONSTRUCTION_SEED = 1315423911


@dataclass(eq=False)
class PolySystem:
    """p homogeneous degree-d forms on F^n in compressed dual coordinates.

    `rows` is (p, C(n+d-1, d)); row j holds the conjugated coefficients of
    generator f_j so that phi pairs Hermitianly with multiplicity weights.
    """

    n: int
    d: int
    rows: sp.csr_matrix
    field: str = COMPLEX

    def __post_init__(self):
        check_field(self.field)
        expected = st.sym_dim(self.n, self.d)
        if self.rows.shape[1] != expected:
            raise InvalidSpec(
                f"coefficient rows must have {expected} columns for n={self.n}, d={self.d}"
            )

    @property
    def p(self) -> int:
        return self.rows.shape[0]

    @cached_property
    def _phi_matrix(self) -> sp.csr_matrix:
        mult = st._multiplicities(self.n, self.d)
        weighted = self.rows.conj().multiply(mult[None, :])
        return sp.csr_matrix(weighted)

    def phi(self, coeffs: np.ndarray) -> np.ndarray:
        """phi(u)_j = <f_j, u> on compressed coordinates."""
        return self._phi_matrix @ coeffs

    def dense_rows(self) -> np.ndarray:
        return np.asarray(self.rows.todense())

    def weighted_rows(self) -> np.ndarray:
        """Rows in sqrt-multiplicity coordinates (isometric for rank checks)."""
        sqrtw = st._sqrt_multiplicities(self.n, self.d)
        return np.asarray(self.rows.multiply(sqrtw[None, :]).todense())

    def row_gram(self) -> np.ndarray:
        """Gram matrix of the rows in the weighted Hermitian inner product."""
        w = self.rows.multiply(st._multiplicities(self.n, self.d)[None, :])
        return np.asarray((w @ self.rows.conj().T).todense())


@dataclass(frozen=True)
class VarietySpec:
    """Catalog entry identifying one conic variety."""

    kind: str
    dims: tuple[int, ...] = ()
    r: int = 0
    n: int = 0
    m: int = 0
    field: str = COMPLEX
    custom_components: tuple = ()

    def __post_init__(self):
        check_field(self.field)
        if self.kind not in _KINDS:
            raise InvalidSpec(f"unknown variety kind {self.kind!r}")
        if self.kind == "determinantal":
            n1, n2 = self._matrix_dims()
            if not 1 <= self.r < min(n1, n2):
                raise InvalidSpec(f"need 1 <= r < min{n1, n2}, got r={self.r}")
        elif self.kind in ("segre", "biseparable", "slice"):
            if len(self.dims) < 2:
                raise InvalidSpec(f"{self.kind} needs at least 2 factors, got {self.dims}")
            if any(d < 1 for d in self.dims):
                raise InvalidSpec(f"factor dimensions must be positive, got {self.dims}")
        elif self.kind == "veronese":
            if self.n < 1 or self.m < 1:
                raise InvalidSpec(f"veronese needs n, m >= 1, got n={self.n}, m={self.m}")
        elif self.kind == "custom" and not self.custom_components:
            raise InvalidSpec("custom spec needs at least one component system")

    def _matrix_dims(self) -> tuple[int, int]:
        if len(self.dims) != 2:
            raise InvalidSpec(f"determinantal needs dims (n1, n2), got {self.dims}")
        return self.dims

    @classmethod
    def determinantal(cls, n1: int, n2: int, r: int, field: str = COMPLEX) -> "VarietySpec":
        return cls(kind="determinantal", dims=(n1, n2), r=r, field=field)

    @classmethod
    def segre(cls, dims, field: str = COMPLEX) -> "VarietySpec":
        return cls(kind="segre", dims=tuple(dims), field=field)

    @classmethod
    def biseparable(cls, dims, field: str = COMPLEX) -> "VarietySpec":
        return cls(kind="biseparable", dims=tuple(dims), field=field)

    @classmethod
    def slice_rank1(cls, dims, field: str = COMPLEX) -> "VarietySpec":
        return cls(kind="slice", dims=tuple(dims), field=field)

    @classmethod
    def veronese(cls, n: int, m: int, field: str = COMPLEX) -> "VarietySpec":
        return cls(kind="veronese", n=n, m=m, field=field)

    @classmethod
    def custom(cls, components, field: str = COMPLEX) -> "VarietySpec":
        return cls(kind="custom", field=field, custom_components=tuple(components))


def ambient_dim(spec: VarietySpec) -> int:
    if spec.kind == "determinantal":
        n1, n2 = spec.dims
        return n1 * n2
    if spec.kind in ("segre", "biseparable", "slice"):
        return int(np.prod(spec.dims))
    if spec.kind == "veronese":
        return st.sym_dim(spec.n, spec.m)
    return spec.custom_components[0].n


def _bipartitions(m: int) -> list[tuple[int, ...]]:
    """Distinct bipartitions (T, complement), T listed, 1 <= |T| <= m/2."""
    parts = []
    for size in range(1, m // 2 + 1):
        for subset in itertools.combinations(range(m), size):
            if 2 * size == m and 0 not in subset:
                continue  # T and its complement cut out the same component
            parts.append(subset)
    return parts


def component_counts(spec: VarietySpec) -> list[int]:
    """Exact generator count per irreducible component (closed forms)."""
    if spec.kind == "determinantal":
        n1, n2 = spec.dims
        return [math.comb(n1, spec.r + 1) * math.comb(n2, spec.r + 1)]
    if spec.kind == "segre":
        total = int(np.prod(spec.dims))
        return [math.comb(total + 1, 2) - int(np.prod([math.comb(k + 1, 2) for k in spec.dims]))]
    if spec.kind == "biseparable":
        counts = []
        total = int(np.prod(spec.dims))
        for subset in _bipartitions(len(spec.dims)):
            left = int(np.prod([spec.dims[i] for i in subset]))
            counts.append(math.comb(left, 2) * math.comb(total // left, 2))
        return counts
    if spec.kind == "slice":
        total = int(np.prod(spec.dims))
        return [
            math.comb(k, 2) * math.comb(total // k, 2)
            for k in spec.dims
        ]
    if spec.kind == "veronese":
        big = st.sym_dim(spec.n, spec.m)
        return [math.comb(big + 1, 2) - math.comb(spec.n + 2 * spec.m - 1, 2 * spec.m)]
    return [comp.p for comp in spec.custom_components]


def _perm_sign(perm: tuple[int, ...]) -> int:
    sign = 1
    seen = [False] * len(perm)
    for start in range(len(perm)):
        if seen[start]:
            continue
        length = 0
        k = start
        while not seen[k]:
            seen[k] = True
            k = perm[k]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _minor_system(pos_matrix: np.ndarray, r: int, field: str) -> PolySystem:
    """All (r+1)x(r+1) minors of a matricization whose entries are ambient
    variable indices, as one degree r+1 component."""
    m1, m2 = pos_matrix.shape
    d = r + 1
    ambient = int(pos_matrix.size)
    n_cols = st.sym_dim(ambient, d)
    row_subs = np.asarray(list(itertools.combinations(range(m1), d)), dtype=np.int64)
    col_subs = np.asarray(list(itertools.combinations(range(m2), d)), dtype=np.int64)
    p = row_subs.shape[0] * col_subs.shape[0]
    inv_dfact = 1.0 / math.factorial(d)
    minor_ids = np.arange(p)
    data, row_ind, col_ind = [], [], []
    for perm in itertools.permutations(range(d)):
        sign = _perm_sign(perm)
        permuted_cols = col_subs[:, list(perm)]
        pos = pos_matrix[row_subs[:, None, :], permuted_cols[None, :, :]]
        pos = pos.reshape(p, d).astype(np.int64)
        pos.sort(axis=1)
        col_ind.append(st._ranks_of_sorted(pos, ambient, d))
        row_ind.append(minor_ids)
        data.append(np.full(p, sign * inv_dfact))
    rows = sp.csr_matrix(
        (np.concatenate(data), (np.concatenate(row_ind), np.concatenate(col_ind))),
        shape=(p, n_cols),
        dtype=field_dtype(field),
    )
    return PolySystem(n=ambient, d=d, rows=rows, field=field)


def _bipartition_pos_matrix(dims: tuple[int, ...], subset: tuple[int, ...]) -> np.ndarray:
    """Ambient flat positions arranged as the (prod T) x (prod rest) matricization."""
    m = len(dims)
    rest = tuple(i for i in range(m) if i not in subset)
    grid = np.arange(int(np.prod(dims)), dtype=np.int64).reshape(dims)
    reordered = np.transpose(grid, subset + rest)
    left = int(np.prod([dims[i] for i in subset]))
    return reordered.reshape(left, -1)


def _sample_rank_one(rng: np.random.Generator, dims, subset, field: str) -> np.ndarray:
    """Gaussian rank-1 point across the (subset | rest) bipartition."""
    m = len(dims)
    rest = tuple(i for i in range(m) if i not in subset)
    left = gaussian(rng, int(np.prod([dims[i] for i in subset])), field)
    right = gaussian(rng, int(np.prod([dims[i] for i in rest])), field)
    shaped = np.outer(left, right).reshape(
        tuple(dims[i] for i in subset) + tuple(dims[i] for i in rest)
    )
    inverse = np.argsort(np.asarray(subset + rest))
    return np.transpose(shaped, inverse).reshape(-1)


def _veronese_point(vector: np.ndarray, m: int) -> np.ndarray:
    """sqrt-multiplicity scaled compressed coordinates of v^{(x)m}."""
    power = st.sym_power(vector, m)
    return st._sqrt_multiplicities(power.n, m) * power.coeffs


def _sampled_quadric_system(
    sampler, ambient: int, expected_p: int, field: str, seed: int,
    tol: TolerancePolicy,
) -> PolySystem:
    """Degree-2 system spanning the annihilator of span{x^(x)2 : x sampled}."""
    s2 = st.sym_dim(ambient, 2)
    idx = st._index_array(ambient, 2)
    sqrtw = st._sqrt_multiplicities(ambient, 2)
    n_samples = 2 * s2
    rng = rng_for(seed)
    samples = np.empty((n_samples, s2), dtype=field_dtype(field))
    for k in range(n_samples):
        x = sampler(rng)
        samples[k] = sqrtw * x[idx[:, 0]] * x[idx[:, 1]]
    kernel = kernel_basis(samples, tol)
    if kernel.shape[1] != expected_p:
        raise InvalidSpec(
            f"sampled quadric span gave {kernel.shape[1]} generators, expected {expected_p}"
        )
    rows = (kernel.conj() / sqrtw[:, None]).T
    return PolySystem(n=ambient, d=2, rows=sp.csr_matrix(rows), field=field)


@lru_cache(maxsize=None)
def _catalog_generators(kind, dims, r, n, m, field) -> tuple[PolySystem, ...]:
    tol = DEFAULT_TOL
    if kind == "determinantal":
        n1, n2 = dims
        pos = np.arange(n1 * n2, dtype=np.int64).reshape(n1, n2)
        return (_minor_system(pos, r, field),)
    if kind in ("biseparable", "slice"):
        subsets = _bipartitions(len(dims)) if kind == "biseparable" else [
            (i,) for i in range(len(dims))
        ]
        return tuple(
            _minor_system(_bipartition_pos_matrix(dims, subset), 1, field)
            for subset in subsets
        )
    if kind == "segre":
        ambient = int(np.prod(dims))
        expected = component_counts(VarietySpec.segre(dims, field))[0]

        def sampler(rng):
            factors = [gaussian(rng, k, field) for k in dims]
            point = factors[0]
            for f in factors[1:]:
                point = np.outer(point, f).reshape(-1)
            return point

        seed = child_seed(_CONSTRUCTION_SEED, "segre", field, *dims)
        return (_sampled_quadric_system(sampler, ambient, expected, field, seed, tol),)
    if kind == "veronese":
        ambient = st.sym_dim(n, m)
        expected = component_counts(VarietySpec.veronese(n, m, field))[0]

        def sampler(rng):
            return _veronese_point(gaussian(rng, n, field), m)

        seed = child_seed(_CONSTRUCTION_SEED, "veronese", field, n, m)
        return (_sampled_quadric_system(sampler, ambient, expected, field, seed, tol),)
    raise InvalidSpec(f"unknown kind {kind!r}")


def generators(spec: VarietySpec) -> list[PolySystem]:
    """One PolySystem per irreducible component (degrees may differ)."""
    if spec.kind == "custom":
        return list(spec.custom_components)
    return list(_catalog_generators(spec.kind, spec.dims, spec.r, spec.n, spec.m, spec.field))


def apply_phi(system: PolySystem, u) -> np.ndarray:
    """Stacked pairings <f_j, u>; zero exactly on the lifted variety."""
    if isinstance(u, st.SymTensor):
        if (u.n, u.d) != (system.n, system.d):
            raise DegreeMismatch(
                f"tensor is S^{u.d}(F^{u.n}) but system expects S^{system.d}(F^{system.n})"
            )
        coeffs = u.coeffs
    else:
        coeffs = np.asarray(u)
        if coeffs.shape != (st.sym_dim(system.n, system.d),):
            raise DegreeMismatch("coefficient vector has the wrong length")
    return system.phi(coeffs)


def membership(spec: VarietySpec, vector, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """True iff some component's generators all vanish at `vector`.

    The threshold is degree-homogeneous (residual_tol * ||v||^d) so the
    test respects the conic structure.
    """
    v = check_vector(vector)
    if v.shape[0] != ambient_dim(spec):
        raise DegreeMismatch("vector dimension does not match the variety's ambient space")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return True
    for comp in generators(spec):
        values = comp.phi(st.sym_power(v, comp.d).coeffs)
        if values.size == 0 or np.max(np.abs(values)) <= tol.residual_tol * norm**comp.d:
            return True
    return False


def sample_point(spec: VarietySpec, seed: int) -> np.ndarray:
    """Deterministic absolutely-continuous sample from the variety."""
    rng = rng_for(seed, "variety-sample")
    field = spec.field
    if spec.kind == "determinantal":
        n1, n2 = spec.dims
        left = gaussian(rng, (n1, spec.r), field)
        right = gaussian(rng, (spec.r, n2), field)
        return (left @ right).reshape(-1)
    if spec.kind == "segre":
        point = gaussian(rng, spec.dims[0], field)
        for k in spec.dims[1:]:
            point = np.outer(point, gaussian(rng, k, field)).reshape(-1)
        return point
    if spec.kind in ("biseparable", "slice"):
        subsets = (
            _bipartitions(len(spec.dims))
            if spec.kind == "biseparable"
            else [(i,) for i in range(len(spec.dims))]
        )
        subset = subsets[int(rng.integers(len(subsets)))]
        return _sample_rank_one(rng, spec.dims, subset, field)
    if spec.kind == "veronese":
        return _veronese_point(gaussian(rng, spec.n, field), spec.m)
    raise InvalidSpec("cannot sample from a custom generator system")


def spec_to_json(spec: VarietySpec) -> dict:
    payload: dict = {"kind": spec.kind, "field": spec.field}
    if spec.kind == "determinantal":
        payload["dims"] = list(spec.dims)
        payload["r"] = spec.r
    elif spec.kind in ("segre", "biseparable", "slice"):
        payload["dims"] = list(spec.dims)
    elif spec.kind == "veronese":
        payload["n"] = spec.n
        payload["m"] = spec.m
    else:
        if len(spec.custom_components) != 1:
            raise InvalidSpec("the JSON format carries a single custom component")
        comp = spec.custom_components[0]
        dense = comp.dense_rows()
        payload["degree"] = comp.d
        payload["generators"] = [vector_to_json(dense[j], spec.field) for j in range(comp.p)]
        payload["ambient"] = comp.n
    return payload


def spec_from_json(payload: dict) -> VarietySpec:
    field = check_field(payload.get("field", COMPLEX))
    kind = payload["kind"]
    if kind == "determinantal":
        n1, n2 = payload["dims"]
        return VarietySpec.determinantal(n1, n2, payload["r"], field)
    if kind == "segre":
        return VarietySpec.segre(payload["dims"], field)
    if kind == "biseparable":
        return VarietySpec.biseparable(payload["dims"], field)
    if kind == "slice":
        return VarietySpec.slice_rank1(payload["dims"], field)
    if kind == "veronese":
        return VarietySpec.veronese(payload["n"], payload["m"], field)
    if kind == "custom":
        degree = payload["degree"]
        rows = [vector_from_json(row, field) for row in payload["generators"]]
        if not rows:
            raise InvalidSpec("custom spec needs at least one generator row")
        ambient = payload.get("ambient")
        if ambient is None:
            ambient = _ambient_from_row_length(len(rows[0]), degree)
        # Generator scale is projective; unit rows keep the membership and
        # kernel thresholds meaningful.
        weights = st._multiplicities(ambient, degree)
        stacked = np.vstack(rows)
        norms = np.sqrt((np.abs(stacked) ** 2 * weights[None, :]).sum(axis=1))
        if np.any(norms == 0.0):
            raise InvalidSpec("custom generator rows must be nonzero")
        matrix = sp.csr_matrix(stacked / norms[:, None])
        return VarietySpec.custom(
            [PolySystem(n=ambient, d=degree, rows=matrix, field=field)], field
        )
    raise InvalidSpec(f"unknown variety kind {kind!r}")


def _ambient_from_row_length(length: int, degree: int) -> int:
    """Invert C(n+d-1, d) = length for n (coefficient rows fix the ambient)."""
    n = 1
    while st.sym_dim(n, degree) < length:
        n += 1
    if st.sym_dim(n, degree) != length:
        raise InvalidSpec(
            f"generator rows of length {length} do not match any ambient "
            f"dimension at degree {degree}"
        )
    return n
