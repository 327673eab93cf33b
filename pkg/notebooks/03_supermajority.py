"""Majority voting against correlated signals.

The adversary puts every state-0 report count either at 0 or just above one
half, and every state-1 count either just below one half or at n. A Bayesian
reading the counts is never wrong, while majority voting is almost always
wrong. The random dictator's regret stays below one half.
"""
from fractions import Fraction

from robustagg import (
    random_dictator,
    regret_at,
    scenario_from_ab,
    supermajority_adversary,
    threshold_rule,
    worst_case_regret,
)

HALF = Fraction(1, 2)
print(" n   majority regret  1 - 4/n   dictator regret")
for n in (6, 10, 20, 40, 100):
    s = scenario_from_ab(HALF, HALF - Fraction(1, n), HALF + Fraction(1, n), n)
    attack = supermajority_adversary(s, HALF)
    maj = regret_at(threshold_rule(n, HALF), attack, s.mu)
    rd = worst_case_regret(random_dictator(n), s)[0]
    print(f"{n:3d}  {float(maj):15.4f}  {float(1 - Fraction(4, n)):7.4f}  {float(rd):15.4f}")
