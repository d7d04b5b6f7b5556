"""Finite-dimensional simulation of indirect quantum measurements and
numerical checks of error-disturbance uncertainty relations."""

from .linalg import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionError,
    InvariantError,
    NumericalIntegrityError,
    adjoint,
    basis_state,
    bloch_state,
    commutator,
    expectation,
    haar_random_state,
    random_hermitian,
    random_unitary,
    spin,
    tensor,
)
from .measurement import (
    MeasurementModel,
    OutOperators,
    Scenario,
    builtin_cnot_model,
    builtin_partial_model,
    joint_initial_state,
    out_operators,
)
from .metrics import (
    RelationReport,
    UnbiasednessFlags,
    decomposition_residual,
    disturbance_eta,
    error_epsilon,
    evaluate_relations,
    evaluate_scenario,
    inequality_chain,
    std_dev,
    unbiasedness,
    variance_decomposition_check,
)
from .search import (
    FuzzSummary,
    ScenarioFamily,
    SearchResult,
    fuzz_relations,
    qubit_family,
    search_violation,
)

__version__ = "0.1.0"
