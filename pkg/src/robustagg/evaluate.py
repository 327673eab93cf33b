"""Success probabilities, regret, minimax value and approximation ratio."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from gmpy2 import mpq

from .errors import SizeMismatch
from .feasible import sparse_mean_vertices, to_dense
from .hull import concavify, convexify, value_at
from .model import AggregationRule, MultiScenario, ReducedStructure, Scenario, as_rational


def _same_n(*ns: int) -> None:
    if len(set(ns)) != 1:
        raise SizeMismatch(f"grid sizes differ: {ns}")


def dm_success(rule: AggregationRule, rs: ReducedStructure, mu) -> Fraction:
    """Probability that ``rule`` guesses the state under ``rs``."""
    _same_n(rule.n, rs.n)
    mu = as_rational(mu)
    e1 = sum((w * f for w, f in zip(rs.dist1, rule.values) if w), Fraction(0))
    e0 = sum((w * f for w, f in zip(rs.dist0, rule.values) if w), Fraction(0))
    return mu * e1 + (1 - mu) * (1 - e0)


def bayes_success(rs: ReducedStructure, mu) -> Fraction:
    """Success probability of a reader who knows ``rs``."""
    mu = as_rational(mu)
    return sum(
        (max((1 - mu) * w0, mu * w1) for w0, w1 in zip(rs.dist0, rs.dist1)), Fraction(0)
    )


def regret_at(rule: AggregationRule, rs: ReducedStructure, mu) -> Fraction:
    r = bayes_success(rs, mu) - dm_success(rule, rs, mu)
    assert r >= 0
    return r


def bayes_responder(rs: ReducedStructure, mu) -> AggregationRule:
    """Best response to a known structure; ties go to guessing state 1."""
    mu = as_rational(mu)
    return AggregationRule(
        rs.n, tuple(Fraction(int(mu * w1 >= (1 - mu) * w0)) for w0, w1 in zip(rs.dist0, rs.dist1))
    )


class PairSpace:
    """Vertex lists for both states plus their pairwise overlaps.

    For a vertex pair the Bayesian success is ``1 - overlap`` where
    ``overlap = sum_k min((1-mu) d0(k), mu d1(k))``; only pairs sharing a
    support point overlap, so those are listed per state-0 vertex.
    """

    def __init__(self, n: int, mu: Fraction, a: Fraction, b: Fraction):
        self.n, self.mu = n, mu
        self.v0 = sparse_mean_vertices(n, a)
        self.v1 = sparse_mean_vertices(n, b)
        # mpq copies for the inner loops
        self.q0 = [tuple((k, _mpq(w)) for k, w in v) for v in self.v0]
        self.q1 = [tuple((k, _mpq(w)) for k, w in v) for v in self.v1]
        by_point: dict[int, list[int]] = {}
        for j, v in enumerate(self.v1):
            for k, _ in v:
                by_point.setdefault(k, []).append(j)
        self.touching = []
        for v in self.v0:
            w0 = dict(v)
            hits = sorted({j for k in w0 for j in by_point.get(k, ())})
            pairs = []
            for j in hits:
                ov = sum(
                    (min((1 - mu) * w0[k], mu * w1) for k, w1 in self.v1[j] if k in w0),
                    Fraction(0),
                )
                pairs.append((j, _mpq(ov)))
            self.touching.append(pairs)

    def overlap(self, i: int, j: int) -> Fraction:
        return _frac(next((ov for jj, ov in self.touching[i] if jj == j), mpq(0)))

    def structure(self, i: int, j: int) -> ReducedStructure:
        return ReducedStructure(self.n, to_dense(self.n, self.v0[i]), to_dense(self.n, self.v1[j]))

    def best_pair(self, A: Sequence, B: Sequence, w=1) -> tuple[Fraction, int, int]:
        """Maximize ``A[i] + B[j] - w * overlap(i, j)``.

        Ties go to the first pair in canonical (row-major) order.
        """
        order = sorted(range(len(B)), key=lambda j: (-B[j], j))
        bmax = B[order[0]]
        best = None  # (value, i, j)
        for i, ai in enumerate(A):
            if best is not None and ai + bmax <= best[0]:
                continue
            touched = self.touching[i]
            hit = {j for j, _ in touched}
            cands = []
            j = next((j for j in order if j not in hit), None)
            if j is not None:
                cands.append((ai + B[j], j))
            for j, ov in touched:
                cands.append((ai + B[j] - w * ov, j))
            val, j = max(cands, key=lambda c: (c[0], -c[1]))
            if best is None or val > best[0]:
                best = (val, i, j)
        return best


@lru_cache(maxsize=256)
def pair_space(n: int, mu: Fraction, a: Fraction, b: Fraction) -> PairSpace:
    return PairSpace(n, mu, a, b)


def _space(scenario: Scenario) -> PairSpace:
    return pair_space(scenario.n, scenario.mu, scenario.a, scenario.b)


def _mpq(x) -> mpq:
    return mpq(x.numerator, x.denominator)


def _frac(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


def _expectations(vertices, values) -> list:
    return [sum((w * values[k] for k, w in v), Fraction(0)) for v in vertices]


def _scores(sp: "PairSpace", rule: AggregationRule):
    """Per-vertex terms ``A`` (state 0) and ``B`` (state 1) of the pair search."""
    f = [_mpq(v) for v in rule.values]
    mu = _mpq(sp.mu)
    A = [(1 - mu) * sum(w * f[k] for k, w in v) for v in sp.q0]
    B = [-mu * sum(w * f[k] for k, w in v) for v in sp.q1]
    return A, B


def worst_case_regret(rule: AggregationRule, scenario: Scenario) -> tuple[Fraction, ReducedStructure]:
    """Maximum regret of ``rule`` over all feasible structures, with the
    first maximizing vertex pair in canonical order."""
    _same_n(rule.n, scenario.n)
    sp = _space(scenario)
    A, B = _scores(sp, rule)
    val, i, j = sp.best_pair(A, B)
    return scenario.mu + _frac(val), sp.structure(i, j)


def minimax_value(rule: AggregationRule, scenario: Scenario) -> Fraction:
    """Worst-case success probability of ``rule``.

    Success is linear in the structure and separable across states, so the
    two states' vertices are minimized independently.
    """
    _same_n(rule.n, scenario.n)
    sp = _space(scenario)
    mu = scenario.mu
    worst0 = max(_expectations(sp.v0, rule.values))
    worst1 = min(_expectations(sp.v1, rule.values))
    return (1 - mu) * (1 - worst0) + mu * worst1


def regret_bound_cavvex(rule: AggregationRule, scenario: Scenario) -> Fraction:
    mu = scenario.mu
    cav_a = value_at(concavify(rule), scenario.a)
    vex_b = value_at(convexify(rule), scenario.b)
    return 1 - (1 - mu) * (1 - cav_a) - mu * vex_b


def _on_support(points: Sequence[Fraction], mean: Fraction, n: int) -> tuple:
    if len(points) == 1:
        return to_dense(n, ((int(points[0] * n), Fraction(1)),))
    lo, hi = points
    w_lo = (hi - mean) / (hi - lo)
    return to_dense(n, ((int(lo * n), w_lo), (int(hi * n), 1 - w_lo)))


def cavvex_witness(rule: AggregationRule, scenario: Scenario) -> ReducedStructure | None:
    """Structure attaining the cav/vex bound when the hull supports at ``a``
    and ``b`` are disjoint, else ``None``."""
    n = rule.n
    s0 = concavify(rule).bracket(scenario.a)
    s1 = convexify(rule).bracket(scenario.b)
    if set(s0) & set(s1):
        return None
    return ReducedStructure(n, _on_support(s0, scenario.a, n), _on_support(s1, scenario.b, n))


def _ratio_violated(rule: AggregationRule, scenario: Scenario, lam: Fraction) -> bool:
    """Whether some structure has ``lam * P* - P > 0``.

    ``lam * P* - P`` is convex in the structure, so vertices suffice.
    """
    sp = _space(scenario)
    A, B = _scores(sp, rule)
    val, _, _ = sp.best_pair(A, B, _mpq(lam))
    return lam - (1 - scenario.mu) + _frac(val) > 0


def approx_ratio(rule: AggregationRule, scenario: Scenario, tol=Fraction(1, 10**9)) -> Fraction:
    """Worst-case ``P / P*`` by bisection; the result is a lower bound within
    ``tol`` of the true value."""
    _same_n(rule.n, scenario.n)
    tol = as_rational(tol)
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    lo, hi = Fraction(0), Fraction(1)
    if not _ratio_violated(rule, scenario, hi):
        return hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if _ratio_violated(rule, scenario, mid):
            hi = mid
        else:
            lo = mid
    return lo


# --- arbitrary finite state space -------------------------------------------


def _check_ms(rule_n: int, dists, ms: MultiScenario) -> None:
    if len(dists) != len(ms.states):
        raise SizeMismatch("need one distribution per state")
    _same_n(rule_n, ms.n, *(len(d) - 1 for d in dists))


def multistate_dm_utility(rule: AggregationRule, dists, ms: MultiScenario) -> Fraction:
    _check_ms(rule.n, dists, ms)
    return sum(
        (
            m * u * sum((w * f for w, f in zip(d, rule.values) if w), Fraction(0))
            for m, u, d in zip(ms.mu, ms.u, dists)
        ),
        Fraction(0),
    )


def multistate_bayes_utility(dists, ms: MultiScenario) -> Fraction:
    """Utility of a reader who takes the optional action whenever its
    conditional expected utility is nonnegative."""
    _check_ms(ms.n, dists, ms)
    total = Fraction(0)
    for k in range(ms.n + 1):
        total += max(Fraction(0), sum((m * u * d[k] for m, u, d in zip(ms.mu, ms.u, dists)), Fraction(0)))
    return total


def multistate_regret_at(rule: AggregationRule, dists, ms: MultiScenario) -> Fraction:
    return multistate_bayes_utility(dists, ms) - multistate_dm_utility(rule, dists, ms)


def multistate_worst_case_regret(rule: AggregationRule, ms: MultiScenario) -> tuple[Fraction, tuple]:
    """Depth-first branch and bound over the product of per-state vertex sets.

    Leaves are visited in product order and a subtree is cut when its bound
    cannot strictly beat the incumbent, so ties resolve to the first vertex
    tuple.
    """
    _same_n(rule.n, ms.n)
    n = ms.n
    verts = [sparse_mean_vertices(n, a) for a in ms.a_high]
    c = [m * u for m, u in zip(ms.mu, ms.u)]
    dm = [[ci * e for e in _expectations(vs, rule.values)] for ci, vs in zip(c, verts)]
    # best possible contribution of each remaining state
    slack = [max(Fraction(0), ci) + max(-x for x in d) for ci, d in zip(c, dm)]
    tail = [Fraction(0)] * (len(c) + 1)
    for s in range(len(c) - 1, -1, -1):
        tail[s] = tail[s + 1] + slack[s]

    best: list = [None, None]
    acc = [Fraction(0)] * (n + 1)
    chosen: list[int] = []

    def visit(s: int, dm_sum: Fraction) -> None:
        pos = sum((x for x in acc if x > 0), Fraction(0))
        if s == len(c):
            val = pos - dm_sum
            if best[0] is None or val > best[0]:
                best[0], best[1] = val, tuple(chosen)
            return
        if best[0] is not None and pos - dm_sum + tail[s] <= best[0]:
            return
        for idx, v in enumerate(verts[s]):
            for k, w in v:
                acc[k] += c[s] * w
            chosen.append(idx)
            visit(s + 1, dm_sum + dm[s][idx])
            chosen.pop()
            for k, w in v:
                acc[k] -= c[s] * w

    visit(0, Fraction(0))
    value, picks = best
    return value, tuple(to_dense(n, verts[s][i]) for s, i in enumerate(picks))


@dataclass(frozen=True)
class RegretSummary:
    regret: Fraction
    minimax: Fraction
    bound: Fraction
    worst: ReducedStructure


def summarize(rule: AggregationRule, scenario: Scenario) -> RegretSummary:
    reg, worst = worst_case_regret(rule, scenario)
    return RegretSummary(reg, minimax_value(rule, scenario), regret_bound_cavvex(rule, scenario), worst)
