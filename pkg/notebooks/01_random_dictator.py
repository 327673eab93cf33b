"""When does following a random agent minimize regret?

Each of n agents sees a binary signal and recommends a state. The decision
maker only sees how many agents said H and does not know how their signals
are correlated. This walks through one scenario as n grows.
"""
from fractions import Fraction

from robustagg import build_scenario, dictator_threshold, verify_random_dictator

mu, p1, p2 = Fraction(1, 2), Fraction(1, 4), Fraction(3, 4)

# a = P(H | state 0), b = P(H | state 1); these fix the adversary's means
s = build_scenario(mu, p1, p2, 2)
print(f"a = {s.a}, b = {s.b}")

# beyond this many agents the random dictator is the unique optimum
N = dictator_threshold(mu, p1, p2)
print(f"threshold N = {N}")

print("\n n  region  optimal regret  rule")
for n in range(2, 9):
    rep = verify_random_dictator(s.with_n(n))
    rule = ", ".join(str(v) for v in rep.rule.values)
    flag = "yes" if rep.in_region else "no"
    print(f"{n:2d}  {flag:6s}  {str(rep.lp_value):14s}  ({rule})")

# Inside the region the regret no longer depends on n: the adversary can
# always make the agents' signals perfectly correlated.
rep = verify_random_dictator(s.with_n(20))
print(f"\nn=20: regret {rep.lp_value} (closed form {rep.closed_form}), unique: {rep.unique}")
