"""Agnostic learning of k-juntas from labeled random walks on the hypercube."""

from .fourier import (
    EstimatorParams,
    Spectrum,
    estimate_bounded_influence,
    estimate_sq_coeff,
    estimate_sq_coeff_bulk,
    inner_product,
    subcube_projection_exact,
    wht,
    wht_int,
)
from .harness import (
    Corruption,
    ExperimentConfig,
    InstanceSpec,
    TrialReport,
    make_instance,
    run_suite,
    run_trial,
)
from .hypercube import (
    IndexSet,
    JuntaHypothesis,
    Point,
    TruthTable,
    chi,
    distance_exact,
    eval_junta,
    flip,
    sample_distance,
)
from .learner import (
    LearnOutcome,
    LearnParams,
    SubcubeTally,
    learn_juntas,
    learn_outcome,
    relevant_pool,
    tally_and_best_junta,
    theta_for,
)
from .oracle_bruteforce import (
    OptResult,
    counterexample_fixtures,
    exact_opt,
    verify_spectrum_lemma,
)
from .sieve import (
    BudgetInfeasible,
    CertifyReport,
    PoolOverflow,
    SieveBudgets,
    SieveParams,
    SieveResult,
    bounded_sieve,
    certify_result,
)
from .walk import (
    LabeledWalk,
    RandomWalkOracle,
    RefreshPair,
    SampleSizePlan,
    WalkConfig,
    generate_walk,
    harvest_refresh_pairs,
    sample_size_concentration,
    sample_size_erm,
    simulate_updating,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetInfeasible",
    "CertifyReport",
    "Corruption",
    "EstimatorParams",
    "ExperimentConfig",
    "IndexSet",
    "InstanceSpec",
    "JuntaHypothesis",
    "LabeledWalk",
    "LearnOutcome",
    "LearnParams",
    "OptResult",
    "Point",
    "PoolOverflow",
    "RandomWalkOracle",
    "RefreshPair",
    "SampleSizePlan",
    "SieveBudgets",
    "SieveParams",
    "SieveResult",
    "Spectrum",
    "SubcubeTally",
    "TrialReport",
    "TruthTable",
    "WalkConfig",
    "bounded_sieve",
    "certify_result",
    "chi",
    "counterexample_fixtures",
    "distance_exact",
    "estimate_bounded_influence",
    "estimate_sq_coeff",
    "estimate_sq_coeff_bulk",
    "eval_junta",
    "exact_opt",
    "flip",
    "generate_walk",
    "harvest_refresh_pairs",
    "inner_product",
    "learn_juntas",
    "learn_outcome",
    "make_instance",
    "relevant_pool",
    "run_suite",
    "run_trial",
    "sample_distance",
    "sample_size_concentration",
    "sample_size_erm",
    "simulate_updating",
    "subcube_projection_exact",
    "tally_and_best_junta",
    "theta_for",
    "verify_spectrum_lemma",
    "wht",
    "wht_int",
]
