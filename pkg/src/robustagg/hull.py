"""Concave and convex envelopes of functions on the report grid."""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import AggregationError, OutOfDomain
from .model import AggregationRule, as_rational, grid


@dataclass(frozen=True)
class PiecewiseLinear:
    breakpoints: tuple[Fraction, ...]
    values: tuple[Fraction, ...]

    def __post_init__(self):
        xs = tuple(as_rational(x) for x in self.breakpoints)
        ys = tuple(as_rational(y) for y in self.values)
        if len(xs) < 2 or len(xs) != len(ys):
            raise AggregationError("need at least two breakpoints with matching values")
        if any(x1 >= x2 for x1, x2 in zip(xs, xs[1:])):
            raise AggregationError("breakpoints must be strictly increasing")
        object.__setattr__(self, "breakpoints", xs)
        object.__setattr__(self, "values", ys)

    def __call__(self, x) -> Fraction:
        return value_at(self, x)

    def bracket(self, x) -> tuple[Fraction, ...]:
        """Breakpoints whose segment contains ``x`` (one point if ``x`` is a
        breakpoint)."""
        x = as_rational(x)
        xs = self.breakpoints
        if not xs[0] <= x <= xs[-1]:
            raise OutOfDomain(f"{x} outside [{xs[0]}, {xs[-1]}]")
        i = bisect_left(xs, x)
        if xs[i] == x:
            return (x,)
        return (xs[i - 1], xs[i])

    def __neg__(self) -> "PiecewiseLinear":
        return PiecewiseLinear(self.breakpoints, tuple(-y for y in self.values))


def value_at(pl: PiecewiseLinear, x) -> Fraction:
    """Exact linear interpolation of ``pl`` at ``x``."""
    x = as_rational(x)
    xs, ys = pl.breakpoints, pl.values
    if not xs[0] <= x <= xs[-1]:
        raise OutOfDomain(f"{x} outside [{xs[0]}, {xs[-1]}]")
    i = bisect_left(xs, x)
    if xs[i] == x:
        return ys[i]
    x0, x1, y0, y1 = xs[i - 1], xs[i], ys[i - 1], ys[i]
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)


def _cross(o, p, q) -> Fraction:
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])


def upper_hull(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> PiecewiseLinear:
    """Upper envelope of points sorted by x; collinear interior points dropped."""
    chain: list[tuple[Fraction, Fraction]] = []
    for p in zip(xs, ys):
        # pop while the last turn is not strictly clockwise
        while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) >= 0:
            chain.pop()
        chain.append(p)
    return PiecewiseLinear(tuple(x for x, _ in chain), tuple(y for _, y in chain))


def lower_hull(xs: Sequence[Fraction], ys: Sequence[Fraction]) -> PiecewiseLinear:
    return -upper_hull(xs, [-y for y in ys])


def concavify(rule: AggregationRule) -> PiecewiseLinear:
    """Smallest concave function above the rule on ``[0, 1]``."""
    return upper_hull(grid(rule.n), rule.values)


def convexify(rule: AggregationRule) -> PiecewiseLinear:
    """Largest convex function below the rule on ``[0, 1]``."""
    return lower_hull(grid(rule.n), rule.values)
