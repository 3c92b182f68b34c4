"""Group-weighted Bonferroni testing with data-driven p-value weights."""

from groupweights.estimation import GroupSummary, MixtureEstimate, mom_chisq, mom_normal, summarize_group
from groupweights.numstats import (
    DomainError,
    pvalue_chisq_1df,
    pvalue_normal_two_sided,
    sample_mixture,
    upper_tail_normal,
    upper_tail_normal_inv,
)
from groupweights.testing import (
    RejectionResult,
    average_power,
    fwer_inflation_bound,
    per_hypothesis_power,
    weighted_reject,
)
from groupweights.weights import (
    BudgetSolution,
    GroupWeights,
    TestBattery,
    group_weights_pipeline,
    optimal_weight,
    smooth_and_renorm,
    solve_budget,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetSolution", "DomainError", "GroupSummary", "GroupWeights", "MixtureEstimate", "RejectionResult",
    "TestBattery", "average_power", "fwer_inflation_bound", "group_weights_pipeline", "mom_chisq", "mom_normal",
    "optimal_weight", "per_hypothesis_power", "pvalue_chisq_1df", "pvalue_normal_two_sided", "sample_mixture",
    "smooth_and_renorm", "solve_budget", "summarize_group", "upper_tail_normal", "upper_tail_normal_inv",
    "weighted_reject",
]
