"""The adversary's strategy space.

A reduced pair ``(dist0, dist1)`` is achievable by some information structure
exactly when its conditional means equal ``(a, b)``. Regret is convex in the
pair, so worst cases live on vertices of ``{rho : E[rho] = mean}``, which are
the distributions supported on at most two grid points.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import (
    EmptyState,
    InfeasibleConstruction,
    LiftFailure,
    MeanOutOfRange,
    SizeMismatch,
    SizeCap,
)
from .lp import LinearProgram, solve
from .model import (
    FullStructure,
    MultiScenario,
    ReducedStructure,
    Scenario,
    as_rational,
)

FULL_STRUCTURE_CAP = 20

# sparse vertex: ((grid index, weight), ...) sorted by index, weights > 0
Sparse = tuple


def check_feasible(rs: ReducedStructure, scenario: Scenario) -> bool:
    if rs.n != scenario.n:
        raise SizeMismatch(f"structure has n={rs.n}, scenario n={scenario.n}")
    return rs.means() == (scenario.a, scenario.b)


@lru_cache(maxsize=4096)
def sparse_mean_vertices(n: int, mean: Fraction) -> tuple[Sparse, ...]:
    """Vertices of ``{rho in Delta(grid) : E[rho] = mean}`` in canonical
    (support-tuple) order."""
    mean = as_rational(mean)
    if not 0 <= mean <= 1:
        raise MeanOutOfRange(f"mean {mean} outside [0, 1]")
    t = mean * n  # target in index units
    out = []
    if t.denominator == 1:
        out.append(((int(t), Fraction(1)),))
    below = [i for i in range(n + 1) if i < t]
    above = [j for j in range(n + 1) if j > t]
    for i in below:
        for j in above:
            wi = (j - t) / (j - i)
            out.append(((i, wi), (j, 1 - wi)))
    out.sort(key=lambda v: tuple(k for k, _ in v))
    return tuple(out)


def to_dense(n: int, v: Sparse) -> tuple[Fraction, ...]:
    d = [Fraction(0)] * (n + 1)
    for k, w in v:
        d[k] += w
    return tuple(d)


def to_sparse(dist: Sequence[Fraction]) -> Sparse:
    return tuple((k, w) for k, w in enumerate(dist) if w)


def enumerate_mean_vertices(n: int, mean) -> list[tuple[Fraction, ...]]:
    """All distributions on at most two grid points with the given mean."""
    return [to_dense(n, v) for v in sparse_mean_vertices(n, as_rational(mean))]


def enumerate_adversary_vertices(scenario: Scenario) -> list[ReducedStructure]:
    n = scenario.n
    v0s = enumerate_mean_vertices(n, scenario.a)
    v1s = enumerate_mean_vertices(n, scenario.b)
    return [ReducedStructure(n, d0, d1) for d0 in v0s for d1 in v1s]


def fully_correlated(scenario: Scenario) -> ReducedStructure:
    """Every agent gets the same signal."""
    n, a, b = scenario.n, scenario.a, scenario.b
    d0 = [Fraction(0)] * (n + 1)
    d1 = [Fraction(0)] * (n + 1)
    d0[0], d0[n] = 1 - a, a
    d1[0], d1[n] = 1 - b, b
    return ReducedStructure(n, tuple(d0), tuple(d1))


def supermajority_adversary(scenario: Scenario, tau) -> ReducedStructure:
    """Structure that defeats the threshold rule ``1[nu >= tau]``.

    State 0 mixes 0 with the smallest grid point ``>= tau``; state 1 mixes
    the largest grid point ``< tau`` with 1. The supports are disjoint, so a
    Bayesian reader of the counts is never wrong.
    """
    tau = as_rational(tau)
    n, a, b = scenario.n, scenario.a, scenario.b
    if not 0 < tau < 1:
        raise InfeasibleConstruction(f"threshold {tau} must lie in (0, 1)")
    k0 = math.ceil(tau * n)
    k1 = k0 - 1
    if k1 < 1 or k0 > n - 1:
        raise InfeasibleConstruction(f"threshold {tau} leaves no interior grid points on both sides")
    nu0, nu1 = Fraction(k0, n), Fraction(k1, n)
    if a > nu0 or b < nu1:
        raise InfeasibleConstruction(
            f"cannot place mean a={a} on {{0, {nu0}}} and b={b} on {{{nu1}, 1}}"
        )
    d0 = [Fraction(0)] * (n + 1)
    d1 = [Fraction(0)] * (n + 1)
    d0[k0] += a / nu0
    d0[0] += 1 - a / nu0
    w1 = (1 - b) / (1 - nu1)  # weight on nu1
    d1[k1] += w1
    d1[n] += 1 - w1
    return ReducedStructure(n, tuple(d0), tuple(d1))


def multistate_vertices(ms: MultiScenario) -> list[tuple[tuple[Fraction, ...], ...]]:
    per_state = [enumerate_mean_vertices(ms.n, a) for a in ms.a_high]
    return list(itertools.product(*per_state))


def _popcount(D: int) -> int:
    return bin(D).count("1")


def membership_C(fs: FullStructure, scenario: Scenario) -> bool:
    """Whether ``fs`` is consistent with the prior and both posteriors."""
    if fs.n != scenario.n:
        raise SizeMismatch(f"structure has n={fs.n}, scenario n={scenario.n}")
    mu, n = scenario.mu, scenario.n
    for mass, total, high in (
        (fs.mass0, 1 - mu, (1 - mu) * scenario.a),
        (fs.mass1, mu, mu * scenario.b),
    ):
        if any(w < 0 for w in mass.values()):
            return False
        if sum(mass.values(), Fraction(0)) != total:
            return False
        for i in range(n):
            if sum((w for D, w in mass.items() if D >> i & 1), Fraction(0)) != high:
                return False
    return True


def reduce(fs: FullStructure) -> ReducedStructure:
    """Conditional distributions of the H-count induced by ``fs``."""
    dists = []
    for state in (0, 1):
        counts = fs.count_masses(state)
        total = sum(counts)
        if total == 0:
            raise EmptyState(f"state {state} carries no mass")
        dists.append(tuple(c / total for c in counts))
    return ReducedStructure(fs.n, dists[0], dists[1])


def full_fully_correlated(scenario: Scenario) -> FullStructure:
    mu, a, b, n = scenario.mu, scenario.a, scenario.b, scenario.n
    top = (1 << n) - 1
    m0 = {0: (1 - mu) * (1 - a)}
    m1 = {0: mu * (1 - b)}
    m0[top] = m0.get(top, 0) + (1 - mu) * a
    m1[top] = m1.get(top, 0) + mu * b
    return FullStructure(n, {D: w for D, w in m0.items() if w}, {D: w for D, w in m1.items() if w})


def _lift_state(n: int, total: Fraction, dist: Sequence[Fraction], mean: Fraction) -> dict:
    size = 1 << n
    lp = LinearProgram([0] * size)
    for k in range(n + 1):
        lp.add_row({D: 1 for D in range(size) if _popcount(D) == k}, "=", total * dist[k])
    for i in range(n):
        lp.add_row({D: 1 for D in range(size) if D >> i & 1}, "=", total * mean)
    sol = solve(lp)
    if not sol.optimal:
        raise LiftFailure(f"no joint structure realizes the count distribution {dist}")
    return {D: w for D, w in enumerate(sol.x) if w}


def lift(rs: ReducedStructure, scenario: Scenario) -> FullStructure:
    """A point of C whose reduction is ``rs`` (first basic LP solution)."""
    if rs.n != scenario.n:
        raise SizeMismatch(f"structure has n={rs.n}, scenario n={scenario.n}")
    if rs.n > FULL_STRUCTURE_CAP:
        raise SizeCap(f"full structures are capped at n={FULL_STRUCTURE_CAP}")
    if not check_feasible(rs, scenario):
        raise LiftFailure("reduced structure does not have means (a, b)")
    mu = scenario.mu
    m0 = _lift_state(rs.n, 1 - mu, rs.dist0, scenario.a)
    m1 = _lift_state(rs.n, mu, rs.dist1, scenario.b)
    return FullStructure(rs.n, m0, m1)
