"""The game over full information structures.

Here the adversary picks a point of the joint polytope C (masses on
``(state, set of agents reporting H)``) instead of a reduced pair. Two DM
models are supported: rules that see only the count of H reports, and rules
that see which agents reported H. The Bayesian benchmark follows the DM's
information: counts in the first case, the full report set in the second.

Adversary best responses enumerate sign patterns (which state wins the max in
each cell of the benchmark); under a fixed pattern the objective is linear
and separates into one LP per state.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import InfeasibleConstruction, SizeCap, SizeMismatch
from .feasible import full_fully_correlated, lift, membership_C, supermajority_adversary
from .lp import LinearProgram, solve
from .model import AggregationRule, FullStructure, Scenario, as_rational
from .optimize import _CutLoop, _Cut, _solve_game, count_bayes, optimal_regret_value

COUNT_CAP = 10
SET_CAP = 3


def _popcount(D: int) -> int:
    return bin(D).count("1")


@dataclass(frozen=True)
class SetRule:
    """Probability of guessing state 1 for each set of H-reporters (bitmask)."""

    n: int
    values: tuple

    def __post_init__(self):
        vals = tuple(as_rational(v) for v in self.values)
        if len(vals) != 1 << self.n:
            raise SizeMismatch(f"need {1 << self.n} values, got {len(vals)}")
        if any(not 0 <= v <= 1 for v in vals):
            raise ValueError("rule values must lie in [0, 1]")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, D: int) -> Fraction:
        return self.values[D]

    @classmethod
    def from_count_rule(cls, rule: AggregationRule) -> "SetRule":
        return cls(rule.n, tuple(rule.values[_popcount(D)] for D in range(1 << rule.n)))

    def symmetrize(self) -> "SetRule":
        """Average over agent permutations: each set gets the mean value of
        the sets of its size."""
        by_size: dict[int, list] = {}
        for D, v in enumerate(self.values):
            by_size.setdefault(_popcount(D), []).append(v)
        means = {k: sum(vs, Fraction(0)) / len(vs) for k, vs in by_size.items()}
        return SetRule(self.n, tuple(means[_popcount(D)] for D in range(1 << self.n)))

    def count_rule(self) -> AggregationRule:
        """The count rule of a symmetric set rule."""
        sym = self.symmetrize()
        if sym != self:
            raise ValueError("rule depends on agent identities")
        vals = [Fraction(0)] * (self.n + 1)
        for D, v in enumerate(self.values):
            vals[_popcount(D)] = v
        return AggregationRule(self.n, tuple(vals))


# --- payoffs on full structures ----------------------------------------------


def set_bayes(x: FullStructure) -> Fraction:
    """Success of a Bayesian who sees every agent's report."""
    keys = set(x.mass0) | set(x.mass1)
    return sum((max(x.mass0.get(D, 0), x.mass1.get(D, 0)) for D in keys), Fraction(0))


def count_dm_success(rule: AggregationRule, x: FullStructure) -> Fraction:
    c0, c1 = x.count_masses(0), x.count_masses(1)
    return sum((w1 * f + w0 * (1 - f) for w0, w1, f in zip(c0, c1, rule.values)), Fraction(0))


def set_dm_success(rule: SetRule, x: FullStructure) -> Fraction:
    total = Fraction(0)
    for D, w in x.mass0.items():
        total += w * (1 - rule[D])
    for D, w in x.mass1.items():
        total += w * rule[D]
    return total


def count_regret(rule: AggregationRule, x: FullStructure) -> Fraction:
    return count_bayes(x) - count_dm_success(rule, x)


def set_regret(rule: SetRule, x: FullStructure) -> Fraction:
    return set_bayes(x) - set_dm_success(rule, x)


# --- best responses --------------------------------------------------------------


class _StateLP:
    """``max sum_D c_D x_D`` over one state's slice of C, memoized on ``c``."""

    def __init__(self, n: int, total: Fraction, mean: Fraction):
        self.n, self.total, self.mean = n, total, mean
        self.cache: dict = {}

    def __call__(self, coef: tuple) -> tuple[Fraction, dict]:
        hit = self.cache.get(coef)
        if hit is not None:
            return hit
        size = 1 << self.n
        lp = LinearProgram(list(coef), "max")
        lp.add_row({D: 1 for D in range(size)}, "=", self.total)
        for i in range(self.n):
            lp.add_row({D: 1 for D in range(size) if D >> i & 1}, "=", self.total * self.mean)
        sol = solve(lp)
        assert sol.optimal, sol.status
        out = (sol.objective, {D: w for D, w in enumerate(sol.x) if w})
        self.cache[coef] = out
        return out


def _state_lps(scenario: Scenario) -> tuple[_StateLP, _StateLP]:
    mu = scenario.mu
    return _StateLP(scenario.n, 1 - mu, scenario.a), _StateLP(scenario.n, mu, scenario.b)


def adversary_best_response_count(
    rule: AggregationRule, scenario: Scenario, _lps=None
) -> tuple[FullStructure, Fraction]:
    """Worst structure in C for a count rule, with the count-based benchmark.

    One LP per state and sign pattern over the ``n + 1`` counts; each
    candidate is re-scored with the true regret, so patterns that disagree
    with the realized max only produce lower scores.
    """
    n = scenario.n
    if rule.n != n:
        raise SizeMismatch(f"rule has n={rule.n}, scenario n={n}")
    if n > COUNT_CAP:
        raise SizeCap(f"count-mode best response is capped at n={COUNT_CAP}")
    lp0, lp1 = _lps or _state_lps(scenario)
    f = rule.values
    best = None
    for pattern in itertools.product((0, 1), repeat=n + 1):
        c0 = tuple(int(pattern[_popcount(D)] == 0) - (1 - f[_popcount(D)]) for D in range(1 << n))
        c1 = tuple(int(pattern[_popcount(D)] == 1) - f[_popcount(D)] for D in range(1 << n))
        _, m0 = lp0(c0)
        _, m1 = lp1(c1)
        x = FullStructure(n, m0, m1)
        val = count_regret(rule, x)
        if best is None or val > best[1]:
            best = (x, val)
    return best


def adversary_best_response_set(rule: SetRule, scenario: Scenario, _lps=None) -> tuple[FullStructure, Fraction]:
    """Worst structure in C for a set rule, with the set-based benchmark."""
    n = scenario.n
    if rule.n != n:
        raise SizeMismatch(f"rule has n={rule.n}, scenario n={n}")
    if n > SET_CAP:
        raise SizeCap(f"set-mode best response is capped at n={SET_CAP}")
    lp0, lp1 = _lps or _state_lps(scenario)
    g = rule.values
    size = 1 << n
    best = None
    for pattern in itertools.product((0, 1), repeat=size):
        c0 = tuple(int(pattern[D] == 0) - (1 - g[D]) for D in range(size))
        c1 = tuple(int(pattern[D] == 1) - g[D] for D in range(size))
        _, m0 = lp0(c0)
        _, m1 = lp1(c1)
        x = FullStructure(n, m0, m1)
        val = set_regret(rule, x)
        if best is None or val > best[1]:
            best = (x, val)
    return best


# --- double oracle -------------------------------------------------------------


def initial_full_structures(scenario: Scenario) -> list[FullStructure]:
    out = [full_fully_correlated(scenario)]
    try:
        out.append(lift(supermajority_adversary(scenario, Fraction(1, 2)), scenario))
    except InfeasibleConstruction:
        pass
    return out


@dataclass
class DoubleOracleResult:
    mode: str
    rule: object  # AggregationRule or SetRule
    value: Fraction
    mixture: list  # [(weight, FullStructure)]
    history: list = field(default_factory=list)  # (restricted value, best-response value)

    @property
    def iterations(self) -> int:
        return len(self.history)


def double_oracle(scenario: Scenario, mode: str = "count") -> DoubleOracleResult:
    """Saddle point of the full game.

    The DM side is the LP itself (one variable per count or per set), so
    only the adversary's structure set grows. Each round solves the
    restricted game, asks for a best response, and stops when it gains
    nothing over the restricted value.
    """
    n = scenario.n
    if mode == "count":
        if n > COUNT_CAP:
            raise SizeCap(f"count mode is capped at n={COUNT_CAP}")
        width = n + 1
        lps = _state_lps(scenario)

        def oracle(vals):
            x, val = adversary_best_response_count(AggregationRule(n, vals), scenario, lps)
            return val, x

        def cut_of(x: FullStructure) -> _Cut:
            c0, c1 = x.count_masses(0), x.count_masses(1)
            # regret = P*(x) - sum c0 + sum (c0 - c1) f
            coefs = tuple(w1 - w0 for w0, w1 in zip(c0, c1))
            return _Cut(coefs, count_bayes(x) - sum(c0, Fraction(0)), x)

        make = lambda vals: AggregationRule(n, vals)
    elif mode == "set":
        if n > SET_CAP:
            raise SizeCap(f"set mode is capped at n={SET_CAP}")
        width = 1 << n
        lps = _state_lps(scenario)

        def oracle(vals):
            x, val = adversary_best_response_set(SetRule(n, vals), scenario, lps)
            return val, x

        def cut_of(x: FullStructure) -> _Cut:
            coefs = tuple(x.mass1.get(D, 0) - x.mass0.get(D, 0) for D in range(width))
            return _Cut(coefs, set_bayes(x) - sum(x.mass0.values(), Fraction(0)), x)

        make = lambda vals: SetRule(n, vals)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    loop = _CutLoop(width, oracle, cut_of)
    for x in initial_full_structures(scenario):
        loop.add(x)
    vals, value, mixture, _, _ = _solve_game(loop, "any", False)
    for _, x in mixture:
        assert membership_C(x, scenario)
    return DoubleOracleResult(mode, make(vals), value, mixture, list(loop.history))


@dataclass
class AnonymityReport:
    reduced: Fraction
    count: Fraction
    set: Fraction
    symmetrized_value: Fraction
    set_rule: SetRule
    symmetrized_rule: SetRule

    @property
    def values_equal(self) -> bool:
        return self.reduced == self.count == self.set

    @property
    def symmetrized_optimal(self) -> bool:
        return self.symmetrized_value == self.set

    @property
    def holds(self) -> bool:
        return self.values_equal and self.symmetrized_optimal


def anonymity_equivalence(scenario: Scenario) -> AnonymityReport:
    """Compare the reduced game, the full count game and the full set game,
    and check that symmetrizing an optimal set rule keeps it optimal."""
    if scenario.n > SET_CAP:
        raise SizeCap(f"anonymity check is capped at n={SET_CAP}")
    reduced = optimal_regret_value(scenario)
    cnt = double_oracle(scenario, "count")
    st = double_oracle(scenario, "set")
    sym = st.rule.symmetrize()
    _, sym_val = adversary_best_response_set(sym, scenario)
    return AnonymityReport(reduced, cnt.value, st.value, sym_val, st.rule, sym)
