from dataclasses import replace
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from robustagg.errors import SizeMismatch
from robustagg.evaluate import (
    approx_ratio,
    bayes_responder,
    bayes_success,
    cavvex_witness,
    dm_success,
    minimax_value,
    multistate_bayes_utility,
    multistate_dm_utility,
    multistate_regret_at,
    multistate_worst_case_regret,
    regret_at,
    regret_bound_cavvex,
    summarize,
    worst_case_regret,
)
from robustagg.feasible import (
    enumerate_adversary_vertices,
    fully_correlated,
    multistate_vertices,
    supermajority_adversary,
)
from robustagg.model import (
    AggregationRule,
    ReducedStructure,
    build_multiscenario,
    multiscenario_from_binary,
    random_dictator,
    scenario_from_ab,
    threshold_rule,
)
from support import random_rule, random_scenario, rules, scenarios

HALF = F(1, 2)
TOL = F(1, 10**9)


def const(n, v):
    return AggregationRule(n, (F(v),) * (n + 1))


def brute_regret(rule, s):
    """Max regret over all vertex pairs, computed straight from the
    definition of the two success probabilities."""
    best = None
    for rs in enumerate_adversary_vertices(s):
        p_star = sum(max((1 - s.mu) * w0, s.mu * w1) for w0, w1 in zip(rs.dist0, rs.dist1))
        p = sum(s.mu * w1 * f + (1 - s.mu) * w0 * (1 - f) for w0, w1, f in zip(rs.dist0, rs.dist1, rule.values))
        if best is None or p_star - p > best[0]:
            best = (p_star - p, rs)
    return best


def brute_ratio(rule, s):
    return min(dm_success(rule, rs, s.mu) / bayes_success(rs, s.mu) for rs in enumerate_adversary_vertices(s))


def test_dm_success_examples(rng):
    s = scenario_from_ab(HALF, F(1, 4), F(3, 4), 4)
    rd = random_dictator(4)
    for rs in enumerate_adversary_vertices(s):
        assert dm_success(rd, rs, s.mu) == F(3, 4)
        assert dm_success(const(4, 1), rs, s.mu) == s.mu
        assert dm_success(const(4, 0), rs, s.mu) == 1 - s.mu
    for _ in range(50):
        s = random_scenario(rng)
        target = (1 - s.mu) * (1 - s.a) + s.mu * s.b
        verts = enumerate_adversary_vertices(s)
        assert dm_success(random_dictator(s.n), rng.choice(verts), s.mu) == target
    with pytest.raises(SizeMismatch):
        dm_success(rd, ReducedStructure(2, (1, 0, 0), (0, 0, 1)), HALF)


def test_bayes_success_examples():
    pt = (0, 1, 0)
    assert bayes_success(ReducedStructure(2, pt, pt), HALF) == HALF
    s = scenario_from_ab(HALF, F(2, 5), F(3, 5), 10)
    assert bayes_success(supermajority_adversary(s, HALF), HALF) == 1
    rs = ReducedStructure(2, (HALF, HALF, 0), (0, HALF, HALF))
    assert bayes_success(rs, HALF) == F(3, 4)


def test_regret_at_examples(rng):
    s = scenario_from_ab(HALF, F(1, 4), F(3, 4), 4)
    assert regret_at(random_dictator(4), fully_correlated(s), s.mu) == 0
    rs = ReducedStructure(2, (1, 0, 0), (0, 0, 1))
    assert regret_at(const(2, 1), rs, HALF) == HALF
    for _ in range(50):
        s = random_scenario(rng)
        for rs in enumerate_adversary_vertices(s)[:5]:
            assert regret_at(bayes_responder(rs, s.mu), rs, s.mu) == 0
            assert regret_at(random_rule(rng, s.n), rs, s.mu) >= 0


def test_worst_case_regret_examples():
    s = scenario_from_ab(HALF, F(1, 4), F(3, 4), 4)
    val, rs = worst_case_regret(random_dictator(4), s)
    assert val == F(1, 4) and regret_at(random_dictator(4), rs, s.mu) == val
    s1 = scenario_from_ab(F(2, 5), F(1, 5), F(3, 5), 1)
    assert worst_case_regret(AggregationRule(1, (0, 1)), s1)[0] == 0
    s10 = scenario_from_ab(HALF, F(2, 5), F(3, 5), 10)
    maj = threshold_rule(10, HALF)
    attack = supermajority_adversary(s10, HALF)
    assert regret_at(maj, attack, HALF) == F(11, 15)
    assert worst_case_regret(maj, s10)[0] >= F(11, 15)


@given(scenarios(n_max=7), rules(7))
@settings(max_examples=200, deadline=None)
def test_worst_case_regret_matches_brute_force(s, rule):
    rule = AggregationRule(s.n, rule.values[: s.n + 1])
    val, rs = worst_case_regret(rule, s)
    ref, ref_rs = brute_regret(rule, s)
    assert val == ref
    assert rs == ref_rs  # first maximizer in canonical order


def test_minimax_examples():
    s = scenario_from_ab(HALF, F(1, 4), F(3, 4), 4)
    assert minimax_value(random_dictator(4), s) == F(3, 4)
    assert minimax_value(const(4, 1), s) == HALF


def test_minimax_bound_and_uniqueness(rng):
    for _ in range(10):
        s = random_scenario(rng, den=12)
        if not 0 < s.a < s.b < 1:
            continue
        top = (1 - s.mu) * (1 - s.a) + s.mu * s.b
        assert minimax_value(random_dictator(s.n), s) == top
        for _ in range(200):
            f = random_rule(rng, s.n)
            v = minimax_value(f, s)
            assert v <= top
            assert (v == top) == f.is_random_dictator()


def test_minimax_matches_brute_force(rng):
    for _ in range(100):
        s = random_scenario(rng)
        f = random_rule(rng, s.n)
        assert minimax_value(f, s) == min(dm_success(f, rs, s.mu) for rs in enumerate_adversary_vertices(s))


def test_cavvex_examples():
    s = scenario_from_ab(HALF, F(1, 4), F(3, 4), 4)
    assert regret_bound_cavvex(random_dictator(4), s) == F(1, 4)
    s2 = scenario_from_ab(HALF, F(1, 4), HALF, 2)
    assert regret_bound_cavvex(AggregationRule(2, (0, 1, 0)), s2) == F(3, 4)


def test_cavvex_bounds_worst_case(rng):
    for _ in range(500):
        s = random_scenario(rng)
        f = random_rule(rng, s.n)
        val = worst_case_regret(f, s)[0]
        assert regret_bound_cavvex(f, s) >= val
        w = cavvex_witness(f, s)
        if w is not None:
            # disjoint hull supports: the bound is attained
            assert regret_at(f, w, s.mu) == regret_bound_cavvex(f, s) == val


def test_cavvex_tight_for_random_dictator(rng):
    for _ in range(100):
        s = random_scenario(rng, n_range=(2, 10))
        if s.in_dictator_region():
            rd = random_dictator(s.n)
            assert worst_case_regret(rd, s)[0] == regret_bound_cavvex(rd, s)


def test_approx_ratio_examples():
    s = scenario_from_ab(HALF, F(1, 4), F(3, 4), 4)
    assert abs(approx_ratio(random_dictator(4), s, TOL) - F(3, 4)) <= TOL
    assert abs(approx_ratio(const(4, 1), s, TOL) - s.mu) <= TOL
    s1 = scenario_from_ab(F(2, 5), F(1, 5), F(3, 5), 1)
    (rs,) = enumerate_adversary_vertices(s1)
    assert approx_ratio(bayes_responder(rs, s1.mu), s1, TOL) == 1
    with pytest.raises(ValueError):
        approx_ratio(random_dictator(4), s, 0)


def test_approx_ratio_matches_brute_force(rng):
    for _ in range(60):
        s = random_scenario(rng, n_range=(1, 5))
        f = random_rule(rng, s.n)
        got = approx_ratio(f, s, TOL)
        ref = brute_ratio(f, s)
        assert got <= ref <= got + TOL


def test_approx_ratio_of_dictator_equals_minimax(rng):
    for _ in range(40):
        s = random_scenario(rng, n_range=(2, 8))
        if s.in_dictator_region():
            rd = random_dictator(s.n)
            assert abs(approx_ratio(rd, s, TOL) - minimax_value(rd, s)) <= TOL


def test_summary():
    s = scenario_from_ab(HALF, F(1, 4), F(3, 4), 4)
    out = summarize(random_dictator(4), s)
    assert (out.regret, out.minimax, out.bound) == (F(1, 4), F(3, 4), F(1, 4))


# --- multistate -----------------------------------------------------------------


def test_multistate_binary_is_affine_image(rng):
    for _ in range(60):
        s = random_scenario(rng, n_range=(1, 5))
        ms = multiscenario_from_binary(s)
        f = random_rule(rng, s.n)
        for rs in enumerate_adversary_vertices(s)[:4]:
            dists = (rs.dist0, rs.dist1)
            assert multistate_dm_utility(f, dists, ms) == dm_success(f, rs, s.mu) - (1 - s.mu)
            assert multistate_regret_at(f, dists, ms) == regret_at(f, rs, s.mu)
        assert multistate_worst_case_regret(f, ms)[0] == worst_case_regret(f, s)[0]
    s = scenario_from_ab(HALF, F(1, 4), F(3, 4), 4)
    ms = multiscenario_from_binary(s)
    assert multistate_worst_case_regret(random_dictator(4), ms)[0] == s.mu + (1 - s.mu) * s.a - s.mu * s.b


def three_state(n):
    return build_multiscenario(
        ("lo", "mid", "hi"),
        (F(7, 20), F(7, 20), F(3, 10)),
        (-2, 1, 3),
        (F(1, 2), F(3, 10), F(1, 5)),
        (F(1, 5), F(2, 5), F(2, 5)),
        n,
    )


def test_multistate_dictator_closed_form():
    ms = three_state(4)
    assert ms.in_dictator_region()
    expected = sum(m * u for m, u in zip(ms.mu, ms.u) if u >= 0) - sum(
        m * a * u for m, a, u in zip(ms.mu, ms.a_high, ms.u)
    )
    assert multistate_worst_case_regret(random_dictator(4), ms)[0] == expected


def test_multistate_all_high_states():
    # u >= 0 everywhere: the optional action is always taken
    ms = replace(three_state(3), u=(F(1), F(1), F(1)))
    f = AggregationRule(3, (0, F(1, 3), 1, F(1, 2)))
    for dists in multistate_vertices(ms):
        ef = sum(m * sum(w * v for w, v in zip(d, f.values)) for m, d in zip(ms.mu, dists))
        assert multistate_bayes_utility(dists, ms) == 1
        assert multistate_dm_utility(f, dists, ms) == ef
        assert multistate_regret_at(f, dists, ms) == 1 - ef


def test_multistate_matches_brute_force(rng):
    for n in (1, 2, 3, 4):
        ms = three_state(n)
        for _ in range(15):
            f = random_rule(rng, n)
            val, picks = multistate_worst_case_regret(f, ms)
            ref = max(multistate_regret_at(f, t, ms) for t in multistate_vertices(ms))
            assert val == ref == multistate_regret_at(f, picks, ms)
    with pytest.raises(SizeMismatch):
        multistate_dm_utility(random_dictator(2), multistate_vertices(three_state(3))[0], three_state(3))
