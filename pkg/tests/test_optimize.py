import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings

from robustagg.errors import NoRegion, SizeCap
from robustagg.evaluate import (
    multistate_regret_at,
    multistate_worst_case_regret,
    regret_at,
    worst_case_regret,
)
from robustagg.feasible import enumerate_adversary_vertices, full_fully_correlated
from robustagg.lp import LinearProgram, solve
from robustagg.model import (
    AggregationRule,
    MultiScenario,
    build_multiscenario,
    build_scenario,
    multiscenario_from_binary,
    random_dictator,
    scenario_from_ab,
)
from robustagg.optimize import (
    concavification_gap_check,
    dictator_regret,
    dictator_regret_multistate,
    dictator_threshold,
    mixture_gap,
    multistate_regret_bound,
    optimal_regret_rule,
    optimal_regret_rule_multistate,
    optimal_regret_value,
    two_agent_closed_form,
    two_agent_region,
    verify_random_dictator,
)
from support import random_rule, random_scenario, scenarios

HALF = F(1, 2)


def dense_lp(s):
    """The full min-max program with one row per vertex pair."""
    n = s.n
    lp = LinearProgram([0] * (n + 1) + [1], "min", bounds=[(0, 1)] * (n + 1) + [(None, None)])
    for rs in enumerate_adversary_vertices(s):
        p_star = sum(max((1 - s.mu) * w0, s.mu * w1) for w0, w1 in zip(rs.dist0, rs.dist1))
        # t >= P* - (1-mu) - sum_k (mu d1 - (1-mu) d0)_k f_k
        row = {k: s.mu * w1 - (1 - s.mu) * w0 for k, (w0, w1) in enumerate(zip(rs.dist0, rs.dist1))}
        row[n + 1] = 1
        lp.add_row(row, ">=", p_star - (1 - s.mu))
    return solve(lp)


def test_examples():
    res = optimal_regret_rule(scenario_from_ab(HALF, F(1, 4), F(3, 4), 4), with_ranges=True)
    assert res.rule.is_random_dictator() and res.regret == F(1, 4) and res.unique
    res = optimal_regret_rule(scenario_from_ab(HALF, F(1, 5), F(7, 10), 2), with_ranges=True)
    assert res.rule.values == (0, F(3, 5), 1) and res.regret == F(3, 25) and res.unique
    res = optimal_regret_rule(scenario_from_ab(F(2, 5), F(1, 5), F(3, 5), 1))
    assert res.rule.values == (0, 1) and res.regret == 0


@given(scenarios(n_max=6))
@settings(max_examples=80, deadline=None)
def test_saddle_point_consistency(s):
    res = optimal_regret_rule(s)
    assert worst_case_regret(res.rule, s)[0] == res.regret
    assert sum(w for w, _ in res.mixture) == 1 and all(w > 0 for w, _ in res.mixture)
    for _, rs in res.mixture:
        assert regret_at(res.rule, rs, s.mu) == res.regret


def test_value_and_lex_rule_match_dense_program():
    rng = random.Random(17)
    for _ in range(60):
        s = random_scenario(rng, n_range=(1, 5), den=20)
        sol = dense_lp(s)
        assert optimal_regret_value(s) == sol.objective
        res = optimal_regret_rule(s, with_ranges=True)
        for k, (lo, hi) in enumerate(res.ranges):
            assert lo <= res.rule.values[k] <= hi
        assert res.unique == all(lo == hi for lo, hi in res.ranges)


def test_random_dictator_region(rng):
    for _ in range(30):
        s = random_scenario(rng, n_range=(3, 15), den=30)
        if not s.in_dictator_region():
            continue
        rep = verify_random_dictator(s)
        assert rep.in_region and rep.value_matches and rep.unique
        assert rep.lp_value == dictator_regret(s)
        assert rep.rule.is_random_dictator()


def test_verify_random_dictator_examples():
    s = build_scenario(HALF, F(1, 4), F(3, 4), 4)
    rep = verify_random_dictator(s)
    assert rep.in_region and rep.closed_form == F(1, 4) and rep.unique
    assert rep.threshold == 4
    out = verify_random_dictator(s.with_n(2))
    assert not out.in_region
    assert out.to_json()["unique"] == "not asserted"
    # outside the region the optimum follows the two-agent closed form
    assert out.lp_value == two_agent_closed_form(s.a, s.b).regret == F(1, 8)


def test_dictator_threshold():
    assert dictator_threshold(HALF, F(1, 4), F(3, 4)) == 4
    assert dictator_threshold(HALF, F(1, 4), 1) is None
    rng = random.Random(2)
    for _ in range(40):
        s = random_scenario(rng, den=20)
        N = dictator_threshold(s.mu, s.p1, s.p2)
        if N is None or not 0 < s.a:
            continue
        assert N == max(1 / s.a, 1 / (1 - s.b))
        n = max(2, math.ceil(N))
        assert s.with_n(n).in_dictator_region()


# --- two agents -------------------------------------------------------------------


def test_two_agent_examples():
    sol = two_agent_closed_form(F(1, 5), F(7, 10))
    assert (sol.case, sol.f_half, sol.regret) == (5, F(3, 5), F(3, 25))
    sol = two_agent_closed_form(F(1, 10), F(3, 10))
    assert (sol.case, sol.f_half, sol.regret) == (1, F(7, 8), F(7, 80))
    sol = two_agent_closed_form(F(3, 5), F(9, 10))
    assert (sol.case, sol.f_half, sol.regret) == (4, F(9, 10), F(9, 100))
    assert two_agent_region(F(1, 4), F(3, 4)) == 5
    with pytest.raises(NoRegion):
        two_agent_closed_form(HALF, HALF)


def test_two_agent_boundaries_agree():
    # on shared boundaries every applicable case yields the same regret
    for a, b in [(F(1, 4), HALF), (F(1, 3), F(2, 3)), (HALF, F(3, 4)), (F(1, 5), F(2, 5))]:
        sol = two_agent_closed_form(a, b)
        assert len(sol.alternatives) >= 2
        assert len({r for _, _, r in sol.alternatives}) == 1


def sample_in_case(rng, case, count):
    out = []
    while len(out) < count:
        a, b = sorted((F(rng.randint(0, 1000), 1000), F(rng.randint(0, 1000), 1000)))
        if a < b and (a, b) != (0, 1) and two_agent_region(a, b) == case:
            out.append((a, b))
    return out


@pytest.mark.parametrize("case", range(1, 9))
def test_two_agent_value_matches_program(case):
    rng = random.Random(case)
    for a, b in sample_in_case(rng, case, 60):
        s = scenario_from_ab(HALF, a, b, 2)
        assert optimal_regret_value(s) == two_agent_closed_form(a, b).regret


@pytest.mark.parametrize("case", [1, 2, 5, 6, 8])
def test_two_agent_rule_attains_regret(case):
    rng = random.Random(10 + case)
    for a, b in sample_in_case(rng, case, 60):
        sol = two_agent_closed_form(a, b)
        assert worst_case_regret(sol.rule, scenario_from_ab(HALF, a, b, 2))[0] == sol.regret


@pytest.mark.parametrize("case", [3, 4, 7])
def test_two_agent_rule_in_cases_3_4_7_is_the_reflection(case):
    """Here the listed f(1/2) is one minus the optimum; the optimum is the
    state-swapped rule of the mirrored pair (1-b, 1-a)."""
    rng = random.Random(20 + case)
    for a, b in sample_in_case(rng, case, 60):
        s = scenario_from_ab(HALF, a, b, 2)
        sol = two_agent_closed_form(a, b)
        res = optimal_regret_rule(s, with_ranges=True)
        mirrored = 1 - two_agent_closed_form(1 - b, 1 - a).f_half
        assert res.unique and res.rule.values == (0, mirrored, 1)
        assert worst_case_regret(AggregationRule(2, (0, mirrored, 1)), s)[0] == sol.regret
        if sol.f_half != mirrored:
            assert worst_case_regret(sol.rule, s)[0] > sol.regret


@given(scenarios(n_max=6, mu=HALF))
@settings(max_examples=60, deadline=None)
def test_state_swap_symmetry(s):
    if (1 - s.b, 1 - s.a) == (0, 1):
        return
    swapped = scenario_from_ab(HALF, 1 - s.b, 1 - s.a, s.n)
    assert optimal_regret_value(s) == optimal_regret_value(swapped)


# --- gap check ----------------------------------------------------------------------


def test_gap_check_examples():
    rep = concavification_gap_check(scenario_from_ab(HALF, F(1, 4), F(3, 4), 4))
    assert rep.matches and rep.gap == F(1, 4)
    rep = concavification_gap_check(scenario_from_ab(HALF, F(1, 5), F(7, 10), 2))
    assert rep.matches and rep.gap == F(3, 25)
    s = scenario_from_ab(HALF, F(1, 4), F(3, 4), 3)
    assert mixture_gap([F(1)], [full_fully_correlated(s)]) == 0
    with pytest.raises(SizeCap):
        concavification_gap_check(s.with_n(11))


def test_gap_check_random(rng):
    for _ in range(10):
        s = random_scenario(rng, n_range=(1, 4), den=12)
        assert concavification_gap_check(s).matches


# --- multistate ---------------------------------------------------------------------


def three_state(n):
    return build_multiscenario(
        ("lo", "mid", "hi"),
        (F(7, 20), F(7, 20), F(3, 10)),
        (-2, 1, 3),
        (F(1, 2), F(3, 10), F(1, 5)),
        (F(1, 5), F(2, 5), F(2, 5)),
        n,
    )


def test_multistate_binary_image(rng):
    for _ in range(15):
        s = random_scenario(rng, n_range=(1, 6), den=20)
        res = optimal_regret_rule_multistate(multiscenario_from_binary(s))
        assert res.regret == optimal_regret_value(s)


def test_multistate_dictator_region():
    ms = three_state(4)
    res = optimal_regret_rule_multistate(ms)
    assert res.unique and res.matches_closed_form
    assert res.regret == dictator_regret_multistate(ms)
    assert res.regret == multistate_worst_case_regret(random_dictator(4), ms)[0]


def test_multistate_single_high_state():
    ms = MultiScenario((0,), (F(1),), (F(1),), (F(1),), (F(1),), 3, (F(1),), HALF)
    res = optimal_regret_rule_multistate(ms)
    assert res.regret == 0 and res.rule.values[-1] == 1


def test_multistate_saddle_and_bound(rng):
    for n in (1, 2, 3, 5):
        ms = three_state(n)
        res = optimal_regret_rule_multistate(ms)
        assert multistate_worst_case_regret(res.rule, ms)[0] == res.regret
        for w, dists in res.mixture:
            assert multistate_regret_at(res.rule, dists, ms) == res.regret
        for _ in range(20):
            f = random_rule(rng, n)
            bound = multistate_regret_bound(f, ms)
            assert bound >= multistate_worst_case_regret(f, ms)[0] >= res.regret


def test_multistate_regret_above_one():
    # utilities scaled by 10 scale the optimal regret by 10, past 1
    base = three_state(3)
    big = build_multiscenario(base.states, base.mu, tuple(10 * u for u in base.u), base.pL, base.pH, 3)
    small, large = optimal_regret_rule_multistate(base), optimal_regret_rule_multistate(big)
    assert large.regret == 10 * small.regret and large.regret > 1
    assert sum(w for w, _ in large.mixture) == 1
