"""Regret-optimal aggregation rules.

The DM picks ``f in [0,1]^{n+1}``; the adversary picks a vertex structure.
Regret against a fixed vertex is affine in ``f``, so the problem is the LP

    min t   s.t.   t >= Reg(f, v)   for every vertex v.

The vertex set grows quickly with ``n`` (tens of thousands of pairs at
``n = 30``), so rows are generated lazily: solve over a working set, ask the
exact worst-case oracle for the most violated vertex, add it, repeat. The
loop stops when the oracle's value equals the working-set value, at which
point the working-set solution is optimal for the full LP and its duals form
an optimal adversary mixture.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .errors import InfeasibleConstruction, NoRegion, SizeCap
from .evaluate import (
    multistate_bayes_utility,
    multistate_worst_case_regret,
    worst_case_regret,
    bayes_success,
)
from .feasible import (
    fully_correlated,
    lift,
    sparse_mean_vertices,
    supermajority_adversary,
    to_dense,
)
from .hull import concavify, convexify, value_at
from .lp import IncrementalLP, LinearProgram, LpSolution, _frac, audit
from .model import (
    AggregationRule,
    FullStructure,
    MultiScenario,
    ReducedStructure,
    Scenario,
    as_rational,
)


@dataclass
class _Cut:
    coefs: tuple  # coefficient of f_k
    rhs: Fraction  # t + coefs.f >= rhs
    payload: object


class _CutLoop:
    """Lazy-row LP over ``(f_0..f_{w-1}, t)`` on one warm-started simplex,
    where ``w`` is the number of rule values."""

    def __init__(self, width: int, oracle: Callable, cut_of: Callable, t_box: Fraction = Fraction(1)):
        self.width = width
        self.t = width
        self.oracle = oracle  # rule values -> (worst regret, payload)
        self.cut_of = cut_of  # payload -> _Cut
        self.cuts: dict = {}
        self.payloads: list = []
        self.rounds = 0
        self.history: list = []  # (restricted value, oracle value) per round
        # regret lies in [0, t_box]; the box on t is kept loose so that only
        # vertex rows carry dual weight
        self.lp = IncrementalLP([(0, 1)] * width + [(-t_box, t_box)])

    def add(self, payload) -> bool:
        key = (payload.dist0, payload.dist1) if isinstance(payload, ReducedStructure) else payload
        if key in self.cuts:
            return False
        cut = self.cut_of(payload)
        self.cuts[key] = cut
        self.payloads.append(payload)
        coeffs = {k: c for k, c in enumerate(cut.coefs) if c}
        coeffs[self.t] = 1
        self.lp.add_row(coeffs, cut.rhs)
        return True

    def point(self) -> list[Fraction]:
        return [_frac(v) for v in self.lp.values()[: self.width + 1]]

    def run(self, objective: dict, sense: str = "min") -> list[Fraction]:
        """Optimize over every vertex row, generating rows as needed; returns
        the optimal ``(f, t)``."""
        sign = 1 if sense == "min" else -1
        self.lp.set_objective({j: sign * c for j, c in objective.items()})
        while True:
            self.rounds += 1
            status = self.lp.reoptimize()
            if status != "optimal":
                raise RuntimeError(f"restricted regret LP is {status}")
            x = self.point()
            worst, payload = self.oracle(x[: self.width])
            self.history.append((x[self.t], worst))
            if worst <= x[self.t]:
                return x
            if not self.add(payload):
                raise RuntimeError("oracle returned a vertex already in the working set")

    def pin(self, var: int, value: Fraction) -> None:
        self.lp.set_bounds(var, value, value)

    def certify(self) -> tuple[LinearProgram, list]:
        """Exact audit of the current optimum; returns the working-set program
        and its row duals."""
        lp = self.lp.program()
        x = self.point()
        duals = [_frac(v) for v in self.lp.row_duals()]
        obj = sum((as_rational(c) * v for c, v in zip(lp.objective, x)), Fraction(0))
        audit(lp, LpSolution("optimal", tuple(x), tuple(duals), obj))
        return lp, duals


@dataclass
class OptimalRule:
    rule: AggregationRule
    regret: Fraction
    mixture: list  # [(weight, structure)]
    ranges: tuple | None = None
    rounds: int = 0
    program: LinearProgram | None = field(default=None, repr=False)

    @property
    def unique(self) -> bool | None:
        if self.ranges is None:
            return None
        return all(lo == hi for lo, hi in self.ranges)


def _solve_game(loop: _CutLoop, select: str, with_ranges: bool) -> tuple:
    """Value, rule values, mixture, face ranges and working-set program."""
    t, w = loop.t, loop.width
    x = loop.run({t: 1})
    value = x[t]
    lp, duals = loop.certify()
    mixture = [(d, p) for d, p in zip(duals, loop.payloads) if d]
    assert sum(d for d, _ in mixture) == 1
    rule_vals = x[:w]
    if not with_ranges and select != "lex":
        return tuple(rule_vals), value, mixture, None, lp
    # stay on the optimal face from here on
    loop.pin(t, value)
    ranges = None
    if with_ranges:
        his = [loop.run({k: 1}, "max")[k] for k in range(w)]
        # every optimal f lies below `his`; if the smallest total reaches
        # sum(his) the face is the single point `his`
        low_sum = loop.run({k: 1 for k in range(w)})
        if sum(low_sum[:w]) == sum(his):
            ranges = tuple((h, h) for h in his)
        else:
            los = [loop.run({k: 1})[k] for k in range(w)]
            ranges = tuple(zip(los, his))
    if ranges is not None and all(lo == hi for lo, hi in ranges):
        rule_vals = [lo for lo, _ in ranges]
    elif select == "lex":
        rule_vals = []
        for k in range(w):
            v = loop.run({k: 1})[k]
            loop.pin(k, v)
            rule_vals.append(v)
    return tuple(rule_vals), value, mixture, ranges, lp


def _binary_loop(scenario: Scenario) -> _CutLoop:
    n, mu = scenario.n, scenario.mu

    def oracle(f):
        return worst_case_regret(AggregationRule(n, f), scenario)

    def cut_of(rs: ReducedStructure) -> _Cut:
        coefs = tuple(mu * w1 - (1 - mu) * w0 for w0, w1 in zip(rs.dist0, rs.dist1))
        return _Cut(coefs, bayes_success(rs, mu) - (1 - mu), rs)

    loop = _CutLoop(n + 1, oracle, cut_of)
    for rs in initial_structures(scenario):
        loop.add(rs)
    return loop


def initial_structures(scenario: Scenario) -> list[ReducedStructure]:
    """Warm start: the fully-correlated structure, the majority-defeating
    structure, and every vertex pair supported on ``{0, 1/n, 1-1/n, 1}``."""
    n = scenario.n
    out = [fully_correlated(scenario)]
    try:
        out.append(supermajority_adversary(scenario, Fraction(1, 2)))
    except InfeasibleConstruction:
        pass
    corners = {0, 1, n - 1, n}
    v0 = [v for v in sparse_mean_vertices(n, scenario.a) if {k for k, _ in v} <= corners]
    v1 = [v for v in sparse_mean_vertices(n, scenario.b) if {k for k, _ in v} <= corners]
    for x in v0:
        for y in v1:
            out.append(ReducedStructure(n, to_dense(n, x), to_dense(n, y)))
    return out


def optimal_regret_rule(scenario: Scenario, *, select: str = "lex", with_ranges: bool = False) -> OptimalRule:
    """Minimum worst-case regret, an optimal rule, and an optimal adversary
    mixture over reduced structures.

    ``select="lex"`` returns the lexicographically smallest optimal rule;
    ``select="any"`` returns the first basic optimum (cheaper). With
    ``with_ranges`` the range of every ``f(k/n)`` over all optimal rules is
    reported as well.
    """
    loop = _binary_loop(scenario)
    vals, value, mixture, ranges, lp = _solve_game(loop, select, with_ranges)
    return OptimalRule(AggregationRule(scenario.n, vals), value, mixture, ranges, loop.rounds, lp)


def optimal_regret_value(scenario: Scenario) -> Fraction:
    return optimal_regret_rule(scenario, select="any").regret


def dictator_regret(scenario: Scenario) -> Fraction:
    """Closed-form regret of the random dictator inside its optimality region."""
    return 1 - (1 - scenario.mu) * (1 - scenario.a) - scenario.mu * scenario.b


def dictator_threshold(mu, p1, p2) -> Fraction | None:
    """Agent count beyond which the random dictator is uniquely optimal.

    ``None`` when no finite count works (a fully revealing posterior).
    """
    mu, p1, p2 = as_rational(mu), as_rational(p1), as_rational(p2)
    if p2 == 1 or p1 == 0:
        return None
    return max(
        (1 - mu) * (p2 - p1) / ((1 - p2) * (mu - p1)),
        mu * (p2 - p1) / (p1 * (p2 - mu)),
    )


@dataclass
class DictatorReport:
    scenario: Scenario
    in_region: bool
    threshold: Fraction | None
    lp_value: Fraction
    closed_form: Fraction | None
    value_matches: bool | None
    unique: bool | None
    ranges: tuple | None
    rule: AggregationRule

    def to_json(self) -> dict:
        return {
            "condition": self.in_region,
            "N": None if self.threshold is None else str(self.threshold),
            "lp_value": str(self.lp_value),
            "closed_form": None if self.closed_form is None else str(self.closed_form),
            "value_matches": self.value_matches if self.in_region else "not asserted",
            "unique": self.unique if self.in_region else "not asserted",
            "rule": [str(v) for v in self.rule.values],
        }


def verify_random_dictator(scenario: Scenario) -> DictatorReport:
    """Check that the random dictator is the unique regret minimizer whenever
    ``1/n <= a < b <= (n-1)/n``."""
    inside = scenario.in_dictator_region()
    res = optimal_regret_rule(scenario, select="lex", with_ranges=inside)
    closed = dictator_regret(scenario)
    if inside:
        matches = res.regret == closed and res.rule.is_random_dictator()
        unique = res.unique and all(
            lo == Fraction(k, scenario.n) for k, (lo, _) in enumerate(res.ranges)
        )
    else:
        matches = unique = None
    return DictatorReport(
        scenario,
        inside,
        dictator_threshold(scenario.mu, scenario.p1, scenario.p2),
        res.regret,
        closed if inside else None,
        matches,
        unique,
        res.ranges,
        res.rule,
    )


# --- two agents, uniform prior ----------------------------------------------

HALF = Fraction(1, 2)


def _two_agent_cases(a: Fraction, b: Fraction) -> list[tuple[int, Fraction, Fraction]]:
    """All cases whose printed conditions hold, with ``(f(1/2), Reg)``."""
    out = []
    if a < b <= HALF and 2 * a <= b:
        out.append((1, (a + 2 * b) / (2 * (a + b)), a * (a + 2 * b) / (2 * (a + b))))
    if a < b <= HALF and 2 * a >= b:
        out.append((2, (3 * b - a) / (2 * (a + b)), (a * a + 4 * a * b - b * b) / (2 * (a + b))))
    if HALF <= a < b and 1 + a >= 2 * b:
        out.append(
            (
                3,
                (2 - 3 * a + b) / (2 * (2 - a - b)),
                (-a * a + 4 * a * b + b * b - 2 * a - 6 * b + 4) / (2 * (2 - a - b)),
            )
        )
    if HALF <= a < b and 1 + a <= 2 * b:
        out.append((4, (3 - 2 * a - b) / (2 * (2 - a - b)), (1 - b) * (3 - 2 * a - b) / (2 * (2 - a - b))))
    if a <= HALF <= b:
        d = 1 + a - b
        if b >= max(2 * a, (a + 1) / 2):
            out.append((5, (1 - b) / d, a * (1 - b) / d))
        if 2 * a >= b >= (a + 1) / 2:
            out.append((6, (2 - 2 * a - b) / (2 * d), (1 - b) * (4 * a - b) / (2 * d)))
        if (a + 1) / 2 >= b >= 2 * a:
            out.append((7, (-1 + a + 2 * b) / (2 * d), a * (3 + a - 4 * b) / (2 * d)))
        if b <= min(2 * a, (a + 1) / 2):
            out.append((8, (3 - a - 3 * b) / (2 * d), (a * a - 6 * a * b + b * b + 5 * a - b) / (2 * d)))
    return out


@dataclass(frozen=True)
class TwoAgentSolution:
    case: int
    f_half: Fraction
    regret: Fraction
    alternatives: tuple  # every applicable (case, f_half, regret)

    @property
    def rule(self) -> AggregationRule:
        return AggregationRule(2, (Fraction(0), self.f_half, Fraction(1)))


def two_agent_closed_form(a, b) -> TwoAgentSolution:
    """Closed-form optimum for two agents and a uniform prior.

    On region boundaries the lowest-numbered case is returned; all
    applicable cases must agree on the regret value.
    """
    a, b = as_rational(a), as_rational(b)
    if not 0 <= a < b <= 1:
        raise NoRegion(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    cases = _two_agent_cases(a, b)
    if not cases:
        raise NoRegion(f"no case applies to a={a}, b={b}")
    regrets = {reg for _, _, reg in cases}
    assert len(regrets) == 1, f"boundary cases disagree at a={a}, b={b}: {cases}"
    case, fh, reg = cases[0]
    return TwoAgentSolution(case, fh, reg, tuple(cases))


def two_agent_region(a, b) -> int:
    return two_agent_closed_form(a, b).case


# --- concavification gap -----------------------------------------------------


def count_bayes(x: FullStructure) -> Fraction:
    """Bayesian success read off a full structure through the H-counts."""
    c0, c1 = x.count_masses(0), x.count_masses(1)
    return sum((max(u, v) for u, v in zip(c0, c1)), Fraction(0))


def mix_structures(weights: Sequence[Fraction], structures: Sequence[FullStructure]) -> FullStructure:
    n = structures[0].n
    m0: dict = {}
    m1: dict = {}
    for w, x in zip(weights, structures):
        for D, v in x.mass0.items():
            m0[D] = m0.get(D, 0) + w * v
        for D, v in x.mass1.items():
            m1[D] = m1.get(D, 0) + w * v
    return FullStructure(n, {D: v for D, v in m0.items() if v}, {D: v for D, v in m1.items() if v})


def mixture_gap(weights: Sequence[Fraction], structures: Sequence[FullStructure]) -> Fraction:
    """``E[P*(x)] - P*(E[x])`` for a finite mixture of full structures."""
    expected = sum((w * count_bayes(x) for w, x in zip(weights, structures)), Fraction(0))
    return expected - count_bayes(mix_structures(weights, structures))


@dataclass
class GapReport:
    lp_regret: Fraction
    gap: Fraction
    weights: tuple
    lifted: tuple

    @property
    def matches(self) -> bool:
        return self.gap == self.lp_regret


def concavification_gap_check(scenario: Scenario) -> GapReport:
    """Lift the optimal adversary mixture into the joint polytope and check
    that its Jensen gap for ``P*`` equals the optimal regret."""
    if scenario.n > 10:
        raise SizeCap("the gap check lifts into 2^(n+1) coordinates; n <= 10")
    res = optimal_regret_rule(scenario, select="any")
    weights = tuple(w for w, _ in res.mixture)
    lifted = tuple(lift(rs, scenario) for _, rs in res.mixture)
    return GapReport(res.regret, mixture_gap(weights, lifted), weights, lifted)


# --- arbitrary finite state space ---------------------------------------------


def _multistate_loop(ms: MultiScenario) -> _CutLoop:
    n = ms.n

    def oracle(f):
        return multistate_worst_case_regret(AggregationRule(n, f), ms)

    def cut_of(dists: tuple) -> _Cut:
        coefs = tuple(
            sum((m * u * d[k] for m, u, d in zip(ms.mu, ms.u, dists)), Fraction(0)) for k in range(n + 1)
        )
        return _Cut(coefs, multistate_bayes_utility(dists, ms), dists)

    # regret never exceeds the total absolute utility at stake
    t_box = 1 + sum((m * abs(u) for m, u in zip(ms.mu, ms.u)), Fraction(0))
    loop = _CutLoop(n + 1, oracle, cut_of, t_box)
    corners = {0, 1, n - 1, n}
    # fully correlated, plus corner-supported vertices per state
    loop.add(tuple(to_dense(n, ((0, 1 - a), (n, a)) if 0 < a < 1 else ((int(a * n), Fraction(1)),)) for a in ms.a_high))
    per_state = []
    for a in ms.a_high:
        vs = [v for v in sparse_mean_vertices(n, a) if {k for k, _ in v} <= corners]
        per_state.append(vs or list(sparse_mean_vertices(n, a))[:1])
    for lo_pick in range(2):
        # low-utility states on the lower corners, high ones on the upper, and vice versa
        pick = []
        for s, vs in enumerate(per_state):
            key = (lambda v: min(k for k, _ in v)) if (ms.u[s] < 0) == (lo_pick == 0) else (lambda v: -max(k for k, _ in v))
            pick.append(to_dense(n, sorted(vs, key=key)[0]))
        loop.add(tuple(pick))
    return loop


def dictator_regret_multistate(ms: MultiScenario) -> Fraction:
    high = sum((m * u for m, u in zip(ms.mu, ms.u) if u >= 0), Fraction(0))
    return high - sum((m * a * u for m, a, u in zip(ms.mu, ms.a_high, ms.u)), Fraction(0))


def multistate_regret_bound(rule: AggregationRule, ms: MultiScenario) -> Fraction:
    """Cav/vex upper bound on a rule's worst-case regret, any state space."""
    cav, vex = concavify(rule), convexify(rule)
    bound = Fraction(0)
    for m, u, a in zip(ms.mu, ms.u, ms.a_high):
        if u >= 0:
            bound += m * u - m * value_at(vex, a) * u
        else:
            bound -= m * value_at(cav, a) * u
    return bound


@dataclass
class MultiStateResult(OptimalRule):
    closed_form: Fraction | None = None

    @property
    def matches_closed_form(self) -> bool | None:
        if self.closed_form is None:
            return None
        return self.regret == self.closed_form and self.rule.is_random_dictator()


def optimal_regret_rule_multistate(
    ms: MultiScenario, *, select: str = "lex", with_ranges: bool | None = None
) -> MultiStateResult:
    inside = ms.in_dictator_region()
    if with_ranges is None:
        with_ranges = inside
    loop = _multistate_loop(ms)
    vals, value, mixture, ranges, lp = _solve_game(loop, select, with_ranges)
    return MultiStateResult(
        AggregationRule(ms.n, vals), value, mixture, ranges, loop.rounds, lp, dictator_regret_multistate(ms) if inside else None
    )
