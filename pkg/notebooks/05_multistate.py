"""More than two states.

The decision maker chooses whether to take an optional action whose payoff
u(w) depends on a state w. Agents still send binary signals. When every
conditional H-probability a_w lies in [1/n, (n-1)/n] the random dictator is
again the unique regret minimizer.
"""
from fractions import Fraction as F

from robustagg import build_multiscenario, optimal_regret_rule_multistate

for n in (2, 3, 4, 6):
    ms = build_multiscenario(
        ("bust", "flat", "boom"),
        (F(7, 20), F(7, 20), F(3, 10)),
        (-2, 1, 3),
        (F(1, 2), F(3, 10), F(1, 5)),
        (F(1, 5), F(2, 5), F(2, 5)),
        n,
    )
    res = optimal_regret_rule_multistate(ms)
    rule = ", ".join(str(v) for v in res.rule.values)
    print(f"n={n}: a={[str(a) for a in ms.a_high]}, region={ms.in_dictator_region()}")
    print(f"    regret {res.regret}, rule ({rule}), closed form {res.closed_form}")
