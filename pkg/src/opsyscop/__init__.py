"""Finite-dimensional operator-system calculus over diagonal algebras.

Builds amalgamated coproducts of matrix operator systems as cone quotients
and decides membership in the quotient matrix cones by convex feasibility.
"""

from .errors import (
    DomainNotFull,
    IllConditioned,
    IncompatibleSystems,
    InputFormatError,
    MissingRepresentation,
    NotHermitian,
    NotInSystem,
    NumericalFailure,
    OperatorSystemError,
    ShapeMismatch,
)
from .matrix_kernel import (
    DEFAULT_TOL,
    Tolerance,
    eig_hermitian,
    eigvals_hermitian,
    frobenius_inner,
    frobenius_norm,
    hermitian_part,
    is_psd,
    psd_project,
    require_hermitian,
    spectral_norm,
)
from .operator_system import (
    DiagonalAlgebra,
    LevelElement,
    MatrixOperatorSystem,
    bimodule_check,
    contains,
    level_element,
    level_positive,
    make_system,
    order_norm,
    span_equal,
)
from .graph_systems import (
    Graph,
    complete_graph,
    diagonal_expectation,
    empty_graph,
    generated_algebra,
    graph,
    graph_system,
    path_graph,
    random_graph,
)
from .cp_maps import (
    LinearMatrixMap,
    bimodule_map_check,
    choi_matrix,
    choi_psd,
    compose,
    full_matrix_system,
    identity_map,
    sampled_kpositive,
    transpose_map,
)
from .feasibility import (
    FeasibilityOutcome,
    FeasibilityProblem,
    Verdict,
    brute_force_2x2,
    diag_block_project,
    solve,
)
from .coproduct import (
    CConeResult,
    CoproductSystem,
    CosetElement,
    build_coproduct,
    c_cone_member,
    d_cone_member,
    embed_left,
    embed_right,
    intersection_check,
    matched_diagonal_demo,
    universal_map,
)

__version__ = "0.1.0"
