"""Two agents, uniform prior: the eight regions of optimal rules.

With n = 2 the only free value is f(1/2), the probability of guessing state
1 when the agents disagree. The optimal value is piecewise rational in
(a, b). We compare the closed forms to the LP and look at where the listed
rules need a state swap.
"""
from fractions import Fraction

from robustagg import optimal_regret_rule, scenario_from_ab, two_agent_closed_form, worst_case_regret

HALF = Fraction(1, 2)
points = [
    (Fraction(1, 10), Fraction(3, 10)),
    (Fraction(2, 5), Fraction(9, 20)),
    (Fraction(11, 20), Fraction(3, 5)),
    (Fraction(3, 5), Fraction(9, 10)),
    (Fraction(1, 5), Fraction(7, 10)),
    (Fraction(2, 5), Fraction(3, 4)),
    (Fraction(3, 10), Fraction(11, 20)),
    (Fraction(2, 5), Fraction(3, 5)),
]

print("case  a      b      Reg (closed)  Reg (LP)  f(1/2) listed  f(1/2) LP  listed rule's regret")
for a, b in points:
    sol = two_agent_closed_form(a, b)
    s = scenario_from_ab(HALF, a, b, 2)
    opt = optimal_regret_rule(s, with_ranges=True)
    listed = worst_case_regret(sol.rule, s)[0]
    print(
        f"{sol.case:4d}  {str(a):5s}  {str(b):5s}  {str(sol.regret):12s}  {str(opt.regret):8s}"
        f"  {str(sol.f_half):13s}  {str(opt.rule.values[1]):9s}  {listed}"
    )

# The regret values always agree. In cases 3, 4 and 7 the listed f(1/2) is
# one minus the optimum: swapping the state labels maps (a, b) to
# (1 - b, 1 - a) and f(x) to 1 - f(1 - x), and the mirrored formula is right.
a, b = Fraction(3, 5), Fraction(9, 10)
mirror = 1 - two_agent_closed_form(1 - b, 1 - a).f_half
print(f"\ncase 4 at a={a}, b={b}: mirrored f(1/2) = {mirror}")
