from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from robustagg.errors import OutOfDomain
from robustagg.hull import PiecewiseLinear, concavify, convexify, value_at
from robustagg.model import AggregationRule, grid, random_dictator
from support import rules


def brute_upper(xs, ys, x):
    """Max over pairs of grid points bracketing x of the chord value."""
    best = None
    for i, j in combinations(range(len(xs)), 2):
        if xs[i] <= x <= xs[j]:
            t = (x - xs[i]) / (xs[j] - xs[i])
            v = ys[i] + t * (ys[j] - ys[i])
            best = v if best is None else max(best, v)
    for xi, yi in zip(xs, ys):
        if xi == x:
            best = yi if best is None else max(best, yi)
    return best


def test_peak_examples():
    f = AggregationRule(2, (0, 1, 0))
    cav = concavify(f)
    assert cav.breakpoints == (0, F(1, 2), 1) and cav.values == (0, 1, 0)
    assert cav(F(1, 4)) == F(1, 2)
    assert value_at(cav, F(3, 4)) == F(1, 2)
    vex = convexify(f)
    assert vex.breakpoints == (0, 1) and vex(F(1, 2)) == 0


def test_linear_rules_are_their_own_hulls():
    f = random_dictator(5)
    for pl in (concavify(f), convexify(f)):
        assert pl.breakpoints == (0, 1)  # collinear interior points dropped
        assert all(pl(x) == x for x in grid(5))


def test_four_point_examples():
    cav = concavify(AggregationRule(3, (0, 0, 0, 1)))
    assert cav.breakpoints == (0, 1) and cav(F(1, 3)) == F(1, 3)
    vex = convexify(AggregationRule(3, (1, 0, 0, 1)))
    assert [vex(x) for x in grid(3)] == [1, 0, 0, 1]
    assert vex(F(1, 6)) == F(1, 2)


def test_value_at_domain_and_breakpoints():
    seg = PiecewiseLinear((0, 1), (0, 1))
    assert seg(F(1, 3)) == F(1, 3)
    assert seg(1) == 1
    with pytest.raises(OutOfDomain):
        seg(F(3, 2))


@st.composite
def sized_rules(draw):
    n = draw(st.integers(1, 8))
    return draw(rules(n))


@given(sized_rules())
@settings(max_examples=150, deadline=None)
def test_hulls_match_brute_force(f):
    xs = grid(f.n)
    cav, vex = concavify(f), convexify(f)
    neg = [-y for y in f.values]
    probes = sorted(set(xs) | {(x + y) / 2 for x, y in zip(xs, xs[1:])})
    for x in probes:
        assert cav(x) == brute_upper(xs, f.values, x)
        assert vex(x) == -brute_upper(xs, neg, x)
        assert cav(x) >= vex(x)
    for x, y in zip(xs, f.values):
        assert cav(x) >= y >= vex(x)


@given(sized_rules())
@settings(max_examples=150, deadline=None)
def test_shape_and_duality(f):
    cav, vex = concavify(f), convexify(f)
    slopes = [
        (y2 - y1) / (x2 - x1)
        for (x1, y1), (x2, y2) in zip(zip(cav.breakpoints, cav.values), list(zip(cav.breakpoints, cav.values))[1:])
    ]
    assert all(s1 > s2 for s1, s2 in zip(slopes, slopes[1:]))
    slopes = [
        (y2 - y1) / (x2 - x1)
        for (x1, y1), (x2, y2) in zip(zip(vex.breakpoints, vex.values), list(zip(vex.breakpoints, vex.values))[1:])
    ]
    assert all(s1 < s2 for s1, s2 in zip(slopes, slopes[1:]))
    # hull vertices are grid points where the hull touches the rule
    for x, y in zip(cav.breakpoints, cav.values):
        assert f.values[int(x * f.n)] == y
    flipped = AggregationRule(f.n, tuple(1 - v for v in f.values))
    # vex f = -cav(-f), shifted by 1 to stay inside [0, 1]
    assert all(vex(x) == 1 - concavify(flipped)(x) for x in grid(f.n))
