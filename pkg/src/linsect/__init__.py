"""linsect: certified linear sections of conic varieties.

Computes all elements of the intersection of a linear subspace with a
conic variety (or certifies the intersection is trivial), and uses that
primitive for entangled-subspace certification and provably unique
low-rank decompositions: tensor rank, Waring rank, and rank-(r,r,1) block
terms.
"""

__version__ = "0.1.0"

from .errors import (
    DegenerateBasis,
    DegenerateDraw,
    DegreeMismatch,
    EigenFailure,
    InvalidSpec,
    LinsectError,
    NonProductW,
    NotSymmetric,
    NotUnique,
    RankMismatch,
)
from .numlin import (
    DEFAULT_TOL,
    TolerancePolicy,
    column_space_basis,
    eig_pairs,
    kernel_basis,
    numerical_rank,
    pseudoinverse,
)
from .symtensor import (
    SymTensor,
    enumerate_multi_indices,
    hook,
    lift_subspace,
    mode_matrix,
    multiplicity,
    sym_dim,
    sym_inner,
    sym_norm,
    sym_power,
    vee,
)
from .varieties import (
    PolySystem,
    VarietySpec,
    ambient_dim,
    apply_phi,
    component_counts,
    generators,
    membership,
    sample_point,
    spec_from_json,
    spec_to_json,
)
from .simdiag import SimDiagOutcome, simultaneous_diagonalize
from .intersect import (
    ComponentsResult,
    IntersectionResult,
    KernelCertificate,
    Subspace,
    UniquenessCertificate,
    intersect_components,
    intersect_subspace,
    rank_bound,
    subspace_from_json,
    subspace_to_json,
    verify_certificate,
)
from .decompose import (
    BlockTermDecomposition,
    TensorDecomposition,
    VarietyDecomposition,
    WaringDecomposition,
    block_term_decompose,
    decomposition_to_json,
    tensor_decompose,
    variety_decompose,
    waring_decompose,
)
from .harness import (
    OverlapWitness,
    PlantedInstance,
    TrialReport,
    contraction_dim_suite,
    genericity_grid,
    grid_from_json,
    overlap_counterexample,
    planted_subspace,
)
from .estimators import (
    BlockTermDecomposer,
    TensorRankDecomposer,
    VarietyDecomposer,
    VarietyIntersection,
    WaringDecomposer,
)

__all__ = [
    "__version__",
    # errors
    "LinsectError", "EigenFailure", "DegenerateBasis", "DegenerateDraw",
    "InvalidSpec", "DegreeMismatch", "NotUnique", "RankMismatch",
    "NotSymmetric", "NonProductW",
    # numlin
    "TolerancePolicy", "DEFAULT_TOL", "numerical_rank", "kernel_basis",
    "pseudoinverse", "eig_pairs", "column_space_basis",
    # symtensor
    "SymTensor", "sym_dim", "enumerate_multi_indices", "multiplicity",
    "vee", "sym_power", "lift_subspace", "hook", "mode_matrix",
    "sym_inner", "sym_norm",
    # varieties
    "VarietySpec", "PolySystem", "generators", "component_counts",
    "ambient_dim", "apply_phi", "membership", "sample_point",
    "spec_to_json", "spec_from_json",
    # simdiag
    "SimDiagOutcome", "simultaneous_diagonalize",
    # intersect
    "Subspace", "IntersectionResult", "ComponentsResult",
    "KernelCertificate", "UniquenessCertificate", "intersect_subspace",
    "intersect_components", "verify_certificate", "rank_bound",
    "subspace_to_json", "subspace_from_json",
    # decompose
    "VarietyDecomposition", "TensorDecomposition", "WaringDecomposition",
    "BlockTermDecomposition", "variety_decompose", "tensor_decompose",
    "waring_decompose", "block_term_decompose", "decomposition_to_json",
    # harness
    "PlantedInstance", "planted_subspace", "TrialReport", "genericity_grid",
    "grid_from_json",
    "contraction_dim_suite", "OverlapWitness", "overlap_counterexample",
    # estimators
    "VarietyIntersection", "VarietyDecomposer", "TensorRankDecomposer",
    "WaringDecomposer", "BlockTermDecomposer",
]
