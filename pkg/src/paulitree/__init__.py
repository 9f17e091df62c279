"""Simulation lab for a prefix-structured quantum state family.

The package pits an adaptive, stagewise Pauli-measurement protocol against
the best non-adaptive (fixed-design) strategy on states that hide a string
b* in {X,Y,Z}^n behind coefficients attached to every prefix depth.  It
provides exact closed-form outcome laws with a dense-matrix oracle to match,
fast reproducible sampling (compiled kernel with a pure NumPy fallback),
both protocols, the KL-based machinery explaining why fixed designs pay an
exponential price, and a Monte Carlo harness that reproduces the
budget-scaling experiment.
"""

from ._backend import active_backend
from .analysis import (
    Allocation,
    BudgetFormulas,
    HardPair,
    TranscriptKLBound,
    bernoulli_kl,
    budget_formulas,
    empirical_transcript_llr,
    kl_alpha,
    one_shot_kl,
    rare_cylinder,
    transcript_kl_bound,
)
from .family import (
    Axis,
    BasisString,
    CoefficientProfile,
    FamilyInstance,
    Outcome,
    PhysicalityReport,
    check_physicality,
    corollary_profile,
    enumerate_bases,
    enumerate_outcomes,
    hard_pair_trace_distance,
    longest_common_prefix,
    outcome_distribution,
    outcome_probability,
    prefix_expectation,
    state_eigenvalues,
    trace_distance_bounds,
)
from .harness import (
    BudgetCurve,
    CheckResult,
    CubicFit,
    CurvePoint,
    ExperimentConfig,
    ExponentialFit,
    MinimalBudget,
    SuccessEstimate,
    VerificationReport,
    emit_outputs,
    estimate_success,
    fit_curves,
    minimal_budget,
    run_sweep,
    verify_all,
    wilson_interval,
)
from .protocols import (
    ProtocolResult,
    StageRule,
    Transcript,
    run_adaptive,
    run_nonadaptive_uniform,
    theorem1_budgets,
    theorem1_stage_budget,
    two_point_test,
)
from .sampling import ShotStream, bias_vector

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "Axis",
    "BasisString",
    "BudgetCurve",
    "BudgetFormulas",
    "CheckResult",
    "CoefficientProfile",
    "CubicFit",
    "CurvePoint",
    "ExperimentConfig",
    "ExponentialFit",
    "FamilyInstance",
    "HardPair",
    "MinimalBudget",
    "Outcome",
    "PhysicalityReport",
    "ProtocolResult",
    "ShotStream",
    "StageRule",
    "SuccessEstimate",
    "Transcript",
    "TranscriptKLBound",
    "VerificationReport",
    "active_backend",
    "bernoulli_kl",
    "bias_vector",
    "budget_formulas",
    "check_physicality",
    "corollary_profile",
    "emit_outputs",
    "empirical_transcript_llr",
    "enumerate_bases",
    "enumerate_outcomes",
    "estimate_success",
    "fit_curves",
    "hard_pair_trace_distance",
    "kl_alpha",
    "longest_common_prefix",
    "minimal_budget",
    "one_shot_kl",
    "outcome_distribution",
    "outcome_probability",
    "prefix_expectation",
    "rare_cylinder",
    "run_adaptive",
    "run_nonadaptive_uniform",
    "run_sweep",
    "state_eigenvalues",
    "theorem1_budgets",
    "theorem1_stage_budget",
    "trace_distance_bounds",
    "transcript_kl_bound",
    "two_point_test",
    "verify_all",
    "wilson_interval",
]
