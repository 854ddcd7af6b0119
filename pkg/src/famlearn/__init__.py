"""Bounded-memory learning: finite automata updating beliefs over a Markov world.

The package models an agent who must compress everything they have seen
into one of finitely many memory states, studies what such an agent can
and cannot learn in the long run, and searches for good update rules at
a fixed memory budget.  Layers, bottom to top: ``signals`` (worlds and
signal structures), ``automata`` (update mechanisms and the standard
constructions), ``chain`` (long-run occupancy, utility, and loss),
``diagnostics`` (likelihood ratios, spreads, ignorance, closed forms),
``search`` (enumeration and annealing), and ``cli`` (batch experiments).
"""

from .automata import (
    MechanismBlueprint,
    UpdatingMechanism,
    build_from_blueprint,
    build_line,
    build_noisy_star,
    build_star,
    build_symmetric_full,
    build_symmetric_ignorant,
    check_star_condition,
    expected_transition_matrix,
    minimal_star_delta,
    step,
    symmetric_model,
)
from .chain import (
    Problem,
    StationaryProfile,
    asymptotic_utility,
    disagreement_probability,
    joint_occupancy,
    monte_carlo_occupancy,
    occupancy_profile,
    optimal_decisions,
    profile_utility,
    recurrent_classes,
    stationary,
    uniform_problem,
    utility_loss,
)
from .diagnostics import (
    DiagnosticsReport,
    PairCommitmentLosses,
    WorldClassification,
    classify_world,
    detect_ignorance,
    diagnostics_report,
    ignorance_predicate,
    likelihood_ratio_matrix,
    pair_commitment_losses,
    pair_commitment_problem,
    spread,
    spread_upper_bound,
    star_occupancy_closed_form,
    symmetric_utilities,
    tradeoff_floor,
)
from .errors import (
    BudgetExceededError,
    DomainError,
    IdenticalRowsError,
    SolverError,
    StarConditionError,
)
from .search import (
    SearchConfig,
    SearchResult,
    enumerate_deterministic,
    enumeration_count,
    epsilon_gap,
    local_search,
)
from .signals import (
    Lottery,
    SignalModel,
    ValidationReport,
    confirmatory_lotteries,
    cs_distance,
    expected_lottery_mass,
    min_density_ratio,
    rademacher_family,
    sup_likelihood_ratio,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "DiagnosticsReport",
    "DomainError",
    "IdenticalRowsError",
    "Lottery",
    "MechanismBlueprint",
    "PairCommitmentLosses",
    "Problem",
    "SearchConfig",
    "SearchResult",
    "SignalModel",
    "SolverError",
    "StarConditionError",
    "StationaryProfile",
    "UpdatingMechanism",
    "ValidationReport",
    "WorldClassification",
    "asymptotic_utility",
    "build_from_blueprint",
    "build_line",
    "build_noisy_star",
    "build_star",
    "build_symmetric_full",
    "build_symmetric_ignorant",
    "check_star_condition",
    "classify_world",
    "confirmatory_lotteries",
    "cs_distance",
    "detect_ignorance",
    "diagnostics_report",
    "disagreement_probability",
    "enumerate_deterministic",
    "enumeration_count",
    "epsilon_gap",
    "expected_lottery_mass",
    "expected_transition_matrix",
    "ignorance_predicate",
    "joint_occupancy",
    "likelihood_ratio_matrix",
    "local_search",
    "min_density_ratio",
    "minimal_star_delta",
    "monte_carlo_occupancy",
    "occupancy_profile",
    "optimal_decisions",
    "pair_commitment_losses",
    "pair_commitment_problem",
    "profile_utility",
    "rademacher_family",
    "recurrent_classes",
    "spread",
    "spread_upper_bound",
    "star_occupancy_closed_form",
    "stationary",
    "step",
    "symmetric_model",
    "symmetric_utilities",
    "tradeoff_floor",
    "uniform_problem",
    "utility_loss",
    "validate",
]
