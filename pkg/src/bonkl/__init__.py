"""Exact analysis of the best-of-n policy over finite discrete base policies.

The best-of-n policy draws n i.i.d. outcomes from a base policy and keeps the
one with the highest reward.  This package computes its PMF exactly, the KL
divergence to the base policy, the widely quoted ``log(n) - (n-1)/n`` value
together with bounds on how far it can be from the truth, and two KL
estimators driven by the base probability of the selected outcome.
"""

from bonkl.bestofn import (
    DerivedPolicy,
    McReport,
    bon_pmf,
    epsilon_infinity,
    epsilon_n_samples,
    exact_kl,
    expected_reward,
    sample_best_of_n,
)
from bonkl.bounds import (
    KlReport,
    alternate_estimator,
    analytical_formula,
    ensemble_kl,
    expected_estimator,
    g_n,
    gap_lower_bound,
    gap_lower_simple,
    gap_upper_bound,
    gap_upper_uniform_delta,
    integral_closed_form,
    kl_report,
    proposed_estimator,
    thm4_bound,
)
from bonkl.policy import (
    BasePolicy,
    CdfPair,
    Context,
    ContextEnsemble,
    binary_entropy,
    cdf_pair,
    read_distribution,
    renyi_entropy,
    validate_policy,
)

__all__ = [
    "BasePolicy",
    "CdfPair",
    "Context",
    "ContextEnsemble",
    "DerivedPolicy",
    "KlReport",
    "McReport",
    "alternate_estimator",
    "analytical_formula",
    "binary_entropy",
    "bon_pmf",
    "cdf_pair",
    "ensemble_kl",
    "epsilon_infinity",
    "epsilon_n_samples",
    "exact_kl",
    "expected_estimator",
    "expected_reward",
    "g_n",
    "gap_lower_bound",
    "gap_lower_simple",
    "gap_upper_bound",
    "gap_upper_uniform_delta",
    "integral_closed_form",
    "kl_report",
    "proposed_estimator",
    "read_distribution",
    "renyi_entropy",
    "sample_best_of_n",
    "thm4_bound",
    "validate_policy",
]
