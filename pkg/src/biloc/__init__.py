"""Bilocal Bell quantities over commuting finite-dimensional *-algebras."""

from .algebra import (
    AlgebraError,
    MatrixAlgebra,
    Scenario,
    anticommuting_pair,
    check_mutual_commutation,
    conditional_expectation,
    contains_M2,
    is_abelian,
    is_valid_scenario,
    leg_algebra,
    make_block_algebra,
    make_tensor_scenario,
)
from .bilocal import (
    BilocalReport,
    ObservableError,
    ObservableSet,
    canonical_max_violation,
    canonical_observables,
    evaluate,
    marginal_factorization_residual,
    max_violation_residuals,
    probability_table,
)
from .optimize import OptimizationTrace, SeesawOptions, seesaw, sweep
from .oracle import classical_bilocal_max, grid_search_qubit, random_search
from .states import (
    NetworkState,
    StateError,
    check_independence,
    make_state,
    mix_toward,
    product_source_state,
    trace_distance,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraError", "MatrixAlgebra", "Scenario", "anticommuting_pair",
    "check_mutual_commutation", "conditional_expectation", "contains_M2", "is_abelian",
    "is_valid_scenario", "leg_algebra", "make_block_algebra", "make_tensor_scenario",
    "BilocalReport", "ObservableError", "ObservableSet", "canonical_max_violation",
    "canonical_observables", "evaluate", "marginal_factorization_residual",
    "max_violation_residuals", "probability_table",
    "OptimizationTrace", "SeesawOptions", "seesaw", "sweep",
    "classical_bilocal_max", "grid_search_qubit", "random_search",
    "NetworkState", "StateError", "check_independence", "make_state", "mix_toward",
    "product_source_state", "trace_distance",
]
