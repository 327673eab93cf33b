"""Regret-robust aggregation of binary recommendations.

Agents each see a binary signal about a binary state; the decision maker sees
only their recommendations and does not know how the signals are correlated.
This package computes worst-case regret, regret-optimal rules, and the
supporting objects (feasible structures, envelopes, an exact LP solver).
"""
from .errors import AggregationError
from .evaluate import (
    approx_ratio,
    bayes_success,
    dm_success,
    minimax_value,
    regret_at,
    regret_bound_cavvex,
    worst_case_regret,
)
from .feasible import enumerate_adversary_vertices, fully_correlated, supermajority_adversary
from .fullgame import SetRule, anonymity_equivalence, double_oracle
from .hull import concavify, convexify
from .model import (
    AggregationRule,
    FullStructure,
    MultiScenario,
    ReducedStructure,
    Scenario,
    build_multiscenario,
    build_scenario,
    random_dictator,
    scenario_from_ab,
    threshold_rule,
)
from .optimize import (
    concavification_gap_check,
    dictator_regret,
    dictator_threshold,
    optimal_regret_rule,
    optimal_regret_rule_multistate,
    two_agent_closed_form,
    verify_random_dictator,
)

__all__ = [
    "AggregationError",
    "AggregationRule",
    "FullStructure",
    "MultiScenario",
    "ReducedStructure",
    "Scenario",
    "SetRule",
    "anonymity_equivalence",
    "approx_ratio",
    "bayes_success",
    "build_multiscenario",
    "build_scenario",
    "concavification_gap_check",
    "concavify",
    "convexify",
    "dictator_regret",
    "dictator_threshold",
    "dm_success",
    "double_oracle",
    "enumerate_adversary_vertices",
    "fully_correlated",
    "minimax_value",
    "optimal_regret_rule",
    "optimal_regret_rule_multistate",
    "random_dictator",
    "regret_at",
    "regret_bound_cavvex",
    "scenario_from_ab",
    "supermajority_adversary",
    "threshold_rule",
    "two_agent_closed_form",
    "verify_random_dictator",
    "worst_case_regret",
]
