"""Unambiguous discrimination of linearly independent pure states, and its use
for single-copy entanglement concentration."""

from .bounds import error_tradeoff, helstrom_bound, idp_bound
from .concentration import (
    ConcentrationResult,
    SchmidtState,
    apply_concentration,
    concentration_probability,
    conjugate_basis,
    derived_states,
    orthogonalisation_operator,
)
from .ensemble import (
    IndependenceReport,
    ReciprocalSet,
    StateEnsemble,
    check_independence,
    gram,
    reciprocal_states,
)
from .errors import (
    DependentStates,
    DomainError,
    Infeasible,
    InvalidInput,
    NoConvergence,
    NotHermitian,
    NotPSD,
    TooLarge,
    USDError,
    WrongArity,
    ZeroCoefficient,
)
from .measurement import (
    OutcomeDistribution,
    ProbabilityOperator,
    USDMeasurement,
    build_measurement,
    outcome_distribution,
    post_inconclusive_states,
    probability_operator,
)
from .numcore import HermitianEig, hermitian_eig, numerical_rank, psd_sqrt
from .optimizer import (
    OptimizationResult,
    embedding_no_gain_check,
    equal_p_solution,
    grid_oracle,
    jaeger_shimony,
    optimize,
    optimize_general,
)
from .simulator import SimulationReport, simulate, simulate_concentration

__version__ = "0.1.0"
