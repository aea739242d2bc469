"""Finite-dimensional quantum state-space toolkit.

State operators and their convex face structure, gemenge (statistical
decomposition) trees, simple objective properties with their Boolean
lattice, and a Born-rule registration simulator with a CHSH-based
proper-vs-improper-mixture demo.
"""

from .errors import (
    DimensionMismatchError,
    MatrixFormatError,
    StateSpaceError,
    ValidationError,
)
from .linalg import (
    HermitianEigensystem,
    PsdResult,
    adjoint,
    hermitian_eig,
    matrix_from_json,
    matrix_to_json,
    partial_trace,
    psd_check,
    tensor_product,
    trace,
)
from .measurement import (
    CHSHConfig,
    EnsembleReport,
    Observable,
    born_distribution,
    chsh_config,
    chsh_value,
    distinguishability_demo,
    expectation,
    observable,
    run_ensemble,
    sampled_chsh,
    singlet_state,
    spin_observable,
    tsirelson_config,
    z_basis_gemenge,
)
from .preparation import (
    Leaf,
    LeafDecomposition,
    Mix,
    PreparationNode,
    compose,
    decompositions_equal,
    evolve,
    is_decomposable,
    leaf,
    leaf_decomposition,
    mix,
    node_from_json,
    node_to_json,
    reduce_subsystem,
    resolve_state,
    sample_leaf,
)
from .properties import (
    PropertyExpr,
    SimpleProperty,
    and_,
    atom,
    average_property,
    check_boolean_laws,
    distributivity_witness,
    eigenvalue_property,
    eval_expr,
    expr_from_json,
    expr_to_json,
    not_,
    or_,
    projection_join,
    projection_meet,
    purity_property,
    variance_property,
)
from .states import (
    ComponentReport,
    FaceHandle,
    StateOperator,
    component_report,
    convex_combine,
    face_contains,
    face_from_projection,
    face_leq,
    face_meet,
    is_extremal,
    max_component_weight,
    new_state,
    pure_state,
    repair_state,
    state_from_json,
    state_to_json,
    states_close,
    sup_ratio,
    support_projection,
)

__version__ = "0.1.0"
