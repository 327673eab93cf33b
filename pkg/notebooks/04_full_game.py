"""Does seeing who said what help?

The reduced game only looks at the number of H reports. Here the full game
over joint information structures is solved by a double oracle, once with a
decision maker that sees counts and once with one that sees the set of H
reporters (and a Bayesian benchmark that also sees the set).
"""
from fractions import Fraction

from robustagg import anonymity_equivalence, double_oracle, scenario_from_ab

HALF = Fraction(1, 2)
for a, b, n in [(Fraction(1, 5), Fraction(7, 10), 2), (Fraction(2, 5), Fraction(3, 5), 3)]:
    s = scenario_from_ab(HALF, a, b, n)
    res = double_oracle(s, "count")
    print(f"a={a}, b={b}, n={n}: count game value {res.value} after {res.iterations} rounds")
    for restricted, response in res.history:
        print(f"    restricted {restricted}  best response {response}")
    rep = anonymity_equivalence(s)
    print(f"    reduced {rep.reduced}, count {rep.count}, set {rep.set}")
    # an optimal set rule may favour one agent; averaging over
    # permutations gives a symmetric rule that is still optimal
    print(f"    set rule {[str(v) for v in rep.set_rule.values]}")
    print(f"    symmetrized {[str(v) for v in rep.symmetrized_rule.values]}, value {rep.symmetrized_value}\n")
