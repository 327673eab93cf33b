import random
from fractions import Fraction
from itertools import combinations

from hypothesis import strategies as st

from robustagg.errors import AggregationError
from robustagg.lp import LinearProgram
from robustagg.model import AggregationRule, build_multiscenario, scenario_from_ab


def rationals(lo=0, hi=1, max_den=24, open_lo=False, open_hi=False):
    """Rationals in [lo, hi] with small denominators."""
    lo, hi = Fraction(lo), Fraction(hi)

    def ok(x):
        return (x > lo if open_lo else x >= lo) and (x < hi if open_hi else x <= hi)

    return (
        st.tuples(st.integers(1, max_den), st.integers(0, 10**6))
        .map(lambda t: lo + (hi - lo) * Fraction(t[1] % (t[0] + 1), t[0]))
        .filter(ok)
    )


@st.composite
def scenarios(draw, n_min=1, n_max=6, mu=None):
    n = draw(st.integers(n_min, n_max))
    m = Fraction(mu) if mu is not None else draw(rationals(0, 1, 12, True, True))
    a = draw(rationals(0, 1, 30))
    b = draw(rationals(0, 1, 30))
    if not a < b or (a == 0 and b == 1):
        a, b = Fraction(1, 4), Fraction(3, 4)
    try:
        return scenario_from_ab(m, a, b, n)
    except AggregationError:
        return scenario_from_ab(Fraction(1, 2), a, b, n)


@st.composite
def rules(draw, n):
    return AggregationRule(n, tuple(draw(rationals(0, 1, 12)) for _ in range(n + 1)))


def random_fraction(rng: random.Random, den=60, lo=0, hi=None):
    hi = den if hi is None else hi
    return Fraction(rng.randint(lo, hi), den)


def random_scenario(rng: random.Random, n_range=(1, 6), mu=None, den=60):
    """A valid scenario with 0 <= a < b <= 1, not fully revealing."""
    while True:
        n = rng.randint(*n_range)
        m = Fraction(mu) if mu is not None else Fraction(rng.randint(1, 19), 20)
        a, b = sorted((random_fraction(rng, den), random_fraction(rng, den)))
        if a == b or (a == 0 and b == 1):
            continue
        try:
            return scenario_from_ab(m, a, b, n)
        except AggregationError:
            continue


def random_rule(rng: random.Random, n, den=12):
    return AggregationRule(n, tuple(Fraction(rng.randint(0, den), den) for _ in range(n + 1)))


def solve_square(A, b):
    """Exact solution of a square system by Gauss-Jordan elimination, or
    None when singular."""
    d = len(A)
    M = [[Fraction(v) for v in row] + [Fraction(rhs)] for row, rhs in zip(A, b)]
    for c in range(d):
        piv = next((r for r in range(c, d) if M[r][c]), None)
        if piv is None:
            return None
        M[c], M[piv] = M[piv], M[c]
        for r in range(d):
            if r != c and M[r][c]:
                q = M[r][c] / M[c][c]
                M[r] = [x - q * y for x, y in zip(M[r], M[c])]
    return [M[i][d] / M[i][i] for i in range(d)]


def brute_force_lp(objective, rows, sense):
    """Optimum over all vertices of {x >= 0 : rows}, found by solving every
    square subsystem of active constraints; None when infeasible."""
    d = len(objective)
    cons = [(list(r), rel, b) for r, rel, b in rows]
    cons += [([int(i == j) for i in range(d)], ">=", 0) for j in range(d)]
    best = None
    for active in combinations(range(len(cons)), d):
        x = solve_square([cons[i][0] for i in active], [cons[i][2] for i in active])
        if x is None:
            continue
        ok = True
        for r, rel, b in cons:
            lhs = sum(a * v for a, v in zip(r, x))
            ok &= lhs <= b if rel == "<=" else lhs >= b if rel == ">=" else lhs == b
        if ok:
            val = sum(c * v for c, v in zip(objective, x))
            if best is None or (val > best if sense == "max" else val < best):
                best = val
    return best


def random_tiny_lp(rng: random.Random):
    """A random LP in at most 4 variables, boxed so it is never unbounded.
    Returns the program and its rows as dense lists."""
    d = rng.randint(1, 4)
    rows = []
    for _ in range(rng.randint(1, 6)):
        r = [rng.randint(-3, 3) for _ in range(d)]
        rel = rng.choice(["<=", ">=", "="]) if rng.random() < 0.3 else "<="
        rows.append((r, rel, rng.randint(-2, 6)))
    for j in range(d):
        rows.append(([int(i == j) for i in range(d)], "<=", 5))
    lp = LinearProgram([rng.randint(-4, 4) for _ in range(d)], rng.choice(["min", "max"]))
    for r, rel, b in rows:
        lp.add_row({j: a for j, a in enumerate(r) if a}, rel, b)
    return lp, rows


def _random_dist(rng: random.Random, k: int, den: int) -> tuple:
    w = [rng.randint(1, den) for _ in range(k)]
    return tuple(Fraction(x, sum(w)) for x in w)


def random_multiscenario(rng: random.Random, k: int, n: int):
    """A valid k-state scenario whose conditional H-probabilities all lie in
    [1/n, (n-1)/n]."""
    while True:
        pL, pH = _random_dist(rng, k, 6), _random_dist(rng, k, 6)
        if any(h == lo for h, lo in zip(pH, pL)):
            continue
        alpha = Fraction(rng.randint(1, 9), 10)
        mu = tuple(alpha * h + (1 - alpha) * lo for h, lo in zip(pH, pL))
        u = [Fraction(rng.randint(-6, 6), 2) for _ in range(k)]
        try:
            ms = build_multiscenario(tuple(range(k)), mu, u, pL, pH, n)
        except AggregationError:
            continue
        if ms.in_dictator_region():
            return ms
