"""Domain types and derived parameters.

All probabilities are stored as :class:`fractions.Fraction`. Inputs may be
ints, Fractions, strings (``"3/4"`` or ``"0.75"``) or floats; floats are read
through their shortest decimal repr, so ``0.1`` becomes exactly ``1/10``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

from .errors import (
    AggregationError,
    DegenerateScenario,
    MixtureViolation,
    OneSidedMarginal,
    OrderingViolation,
    PriorMismatch,
    PriorOutOfRange,
    SignViolation,
    ZeroDenominator,
)

HALF = Fraction(1, 2)


def as_rational(x) -> Fraction:
    """Convert ``x`` to an exact Fraction without binary rounding."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise AggregationError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise AggregationError(f"cannot parse {x!r} as a rational") from exc
    if isinstance(x, Rational) or hasattr(x, "denominator"):
        # gmpy2.mpq and friends
        return Fraction(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def _check_probability(name: str, x: Fraction) -> None:
    if not 0 <= x <= 1:
        raise AggregationError(f"{name}={x} is not a probability")


def grid(n: int) -> tuple[Fraction, ...]:
    """The report-fraction grid ``0, 1/n, ..., 1``."""
    return tuple(Fraction(k, n) for k in range(n + 1))


@dataclass(frozen=True)
class Scenario:
    mu: Fraction
    p1: Fraction
    p2: Fraction
    n: int
    a: Fraction
    b: Fraction

    @property
    def high_probability(self) -> Fraction:
        """Unconditional probability that a fixed agent reports H."""
        return self.mu * self.b + (1 - self.mu) * self.a

    def in_dictator_region(self) -> bool:
        """Whether ``1/n <= a < b <= (n-1)/n`` (edges included)."""
        n = self.n
        return Fraction(1, n) <= self.a < self.b <= Fraction(n - 1, n)

    def with_n(self, n: int) -> "Scenario":
        return build_scenario(self.mu, self.p1, self.p2, n)


@dataclass(frozen=True)
class AggregationRule:
    n: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        vals = tuple(as_rational(v) for v in self.values)
        if self.n < 1:
            raise AggregationError("agent count must be positive")
        if len(vals) != self.n + 1:
            raise AggregationError(f"rule needs {self.n + 1} values, got {len(vals)}")
        for v in vals:
            _check_probability("f", v)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, k: int) -> Fraction:
        return self.values[k]

    def __len__(self) -> int:
        return len(self.values)

    def is_random_dictator(self) -> bool:
        return all(v == Fraction(k, self.n) for k, v in enumerate(self.values))


def random_dictator(n: int) -> AggregationRule:
    """Follow a uniformly chosen agent: ``f(k/n) = k/n``."""
    return AggregationRule(n, grid(n))


def constant_rule(n: int, c) -> AggregationRule:
    return AggregationRule(n, (as_rational(c),) * (n + 1))


def threshold_rule(n: int, tau) -> AggregationRule:
    """Deterministic (super)majority rule ``f(nu) = 1[nu >= tau]``."""
    tau = as_rational(tau)
    return AggregationRule(n, tuple(Fraction(int(x >= tau)) for x in grid(n)))


def _check_distribution(name: str, dist: Sequence[Fraction]) -> None:
    if any(w < 0 for w in dist):
        raise AggregationError(f"{name} has a negative weight")
    if sum(dist) != 1:
        raise AggregationError(f"{name} sums to {sum(dist)}, not 1")


@dataclass(frozen=True)
class ReducedStructure:
    """State-conditional distributions of the high-report count."""

    n: int
    dist0: tuple[Fraction, ...]
    dist1: tuple[Fraction, ...]

    def __post_init__(self):
        d0 = tuple(as_rational(w) for w in self.dist0)
        d1 = tuple(as_rational(w) for w in self.dist1)
        if len(d0) != self.n + 1 or len(d1) != self.n + 1:
            raise AggregationError("distribution length must be n+1")
        _check_distribution("dist0", d0)
        _check_distribution("dist1", d1)
        object.__setattr__(self, "dist0", d0)
        object.__setattr__(self, "dist1", d1)

    @classmethod
    def from_points(cls, n: int, dist0: dict, dist1: dict) -> "ReducedStructure":
        """Build from ``{fraction: weight}`` maps keyed by grid points."""
        return cls(n, _dense(n, dist0), _dense(n, dist1))

    def means(self) -> tuple[Fraction, Fraction]:
        return distribution_mean(self.dist0), distribution_mean(self.dist1)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "dist0": [str(w) for w in self.dist0],
            "dist1": [str(w) for w in self.dist1],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ReducedStructure":
        return cls(int(obj["n"]), tuple(obj["dist0"]), tuple(obj["dist1"]))


def _dense(n: int, points: dict) -> tuple[Fraction, ...]:
    out = [Fraction(0)] * (n + 1)
    for x, w in points.items():
        k = as_rational(x) * n
        if k.denominator != 1 or not 0 <= k <= n:
            raise AggregationError(f"{x} is not a grid point for n={n}")
        out[int(k)] += as_rational(w)
    return tuple(out)


def distribution_mean(dist: Sequence[Fraction]) -> Fraction:
    n = len(dist) - 1
    return sum((w * k for k, w in enumerate(dist) if w), Fraction(0)) / n


@dataclass(frozen=True)
class FullStructure:
    """Joint mass over (state, set of agents reporting H).

    Subsets are bitmasks: bit ``i`` set means agent ``i+1`` reports H.
    Missing keys carry zero mass.
    """

    n: int
    mass0: dict
    mass1: dict

    def __post_init__(self):
        for name in ("mass0", "mass1"):
            m = {int(D): as_rational(w) for D, w in getattr(self, name).items()}
            if any(D < 0 or D >= 1 << self.n for D in m):
                raise AggregationError(f"{name} has a subset outside 2^[n]")
            object.__setattr__(self, name, m)

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.mass0.items())), tuple(sorted(self.mass1.items()))))

    def count_masses(self, state: int) -> tuple[Fraction, ...]:
        """Mass per number of H reports, for the given state."""
        mass = self.mass1 if state else self.mass0
        out = [Fraction(0)] * (self.n + 1)
        for D, w in mass.items():
            out[D.bit_count() if hasattr(D, "bit_count") else bin(D).count("1")] += w
        return tuple(out)

    def vector(self) -> tuple[Fraction, ...]:
        """Dense coordinates ``(x^0_D for D) + (x^1_D for D)`` in bitmask order."""
        size = 1 << self.n
        return tuple(self.mass0.get(D, Fraction(0)) for D in range(size)) + tuple(
            self.mass1.get(D, Fraction(0)) for D in range(size)
        )

    @classmethod
    def from_vector(cls, n: int, x: Sequence) -> "FullStructure":
        size = 1 << n
        if len(x) != 2 * size:
            raise AggregationError(f"expected {2 * size} coordinates, got {len(x)}")
        x = [as_rational(v) for v in x]
        return cls(
            n,
            {D: x[D] for D in range(size) if x[D]},
            {D: x[size + D] for D in range(size) if x[size + D]},
        )

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "mass0": {str(D): str(w) for D, w in sorted(self.mass0.items())},
            "mass1": {str(D): str(w) for D, w in sorted(self.mass1.items())},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FullStructure":
        return cls(int(obj["n"]), dict(obj["mass0"]), dict(obj["mass1"]))


@dataclass(frozen=True)
class PosteriorMarginal:
    """A single agent's distribution over posteriors ``(q, weight)``."""

    atoms: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        atoms = tuple((as_rational(q), as_rational(w)) for q, w in self.atoms)
        for q, w in atoms:
            _check_probability("q", q)
            if w < 0:
                raise AggregationError("negative atom weight")
        if sum(w for _, w in atoms) != 1:
            raise AggregationError("marginal weights must sum to 1")
        object.__setattr__(self, "atoms", atoms)

    def mean(self) -> Fraction:
        return sum((q * w for q, w in self.atoms), Fraction(0))


@dataclass(frozen=True)
class MultiScenario:
    states: tuple
    mu: tuple[Fraction, ...]
    u: tuple[Fraction, ...]
    pL: tuple[Fraction, ...]
    pH: tuple[Fraction, ...]
    n: int
    a_high: tuple[Fraction, ...]
    alpha: Fraction

    @property
    def high_states(self) -> tuple:
        """States where the optional action is weakly better."""
        return tuple(w for w, u in zip(self.states, self.u) if u >= 0)

    @property
    def low_states(self) -> tuple:
        return tuple(w for w, u in zip(self.states, self.u) if u < 0)

    def in_dictator_region(self) -> bool:
        lo, hi = Fraction(1, self.n), Fraction(self.n - 1, self.n)
        return all(lo <= a <= hi for a in self.a_high)

    def with_n(self, n: int) -> "MultiScenario":
        return build_multiscenario(self.states, self.mu, self.u, self.pL, self.pH, n)


def build_scenario(mu, p1, p2, n: int) -> Scenario:
    """Validate ``(mu, p1, p2, n)`` and derive ``a = P(H | state 0)``,
    ``b = P(H | state 1)``."""
    mu, p1, p2 = as_rational(mu), as_rational(p1), as_rational(p2)
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise AggregationError(f"agent count must be a positive integer, got {n!r}")
    n = int(n)
    for name, x in (("mu", mu), ("p1", p1), ("p2", p2)):
        _check_probability(name, x)
    if p1 == p2:
        raise DegenerateScenario("p1 == p2: signals carry no information")
    if not p1 < HALF < p2:
        raise OrderingViolation(f"need p1 < 1/2 < p2, got p1={p1}, p2={p2}")
    if mu in (p1, p2):
        raise DegenerateScenario("prior equals a posterior: one signal has probability 0")
    if not p1 < mu < p2:
        raise PriorOutOfRange(f"need p1 < mu < p2, got mu={mu}")
    a = (1 - p2) * (mu - p1) / ((1 - mu) * (p2 - p1))
    b = p2 * (mu - p1) / (mu * (p2 - p1))
    assert 0 <= a < b <= 1, (a, b)
    return Scenario(mu, p1, p2, n, a, b)


def scenario_from_ab(mu, a, b, n: int) -> Scenario:
    """Recover the posteriors from ``(mu, a, b)`` and build the scenario."""
    mu, a, b = as_rational(mu), as_rational(a), as_rational(b)
    if not 0 < mu < 1:
        raise PriorOutOfRange(f"mu={mu} must lie strictly inside (0, 1)")
    if not 0 <= a < b <= 1:
        raise OrderingViolation(f"need 0 <= a < b <= 1, got a={a}, b={b}")
    h = mu * b + (1 - mu) * a
    p2 = mu * b / h
    p1 = mu * (1 - b) / (1 - h)
    s = build_scenario(mu, p1, p2, n)
    assert (s.a, s.b) == (a, b)
    return s


def binarize_posteriors(marginal: PosteriorMarginal, mu, n: int) -> Scenario:
    """Collapse a general posterior marginal to its binary recommendation
    posteriors ``p1 = E[q | q < 1/2]`` and ``p2 = E[q | q >= 1/2]``."""
    if not isinstance(marginal, PosteriorMarginal):
        marginal = PosteriorMarginal(tuple(marginal))
    mu = as_rational(mu)
    low = [(q, w) for q, w in marginal.atoms if q < HALF and w > 0]
    high = [(q, w) for q, w in marginal.atoms if q >= HALF and w > 0]
    if not low or not high:
        raise OneSidedMarginal("posteriors must fall on both sides of 1/2")
    if marginal.mean() != mu:
        raise PriorMismatch(f"marginal mean {marginal.mean()} differs from prior {mu}")
    wl = sum(w for _, w in low)
    wh = sum(w for _, w in high)
    p1 = sum(q * w for q, w in low) / wl
    p2 = sum(q * w for q, w in high) / wh
    return build_scenario(mu, p1, p2, n)


def build_multiscenario(states, mu, u, pL, pH, n: int, alpha=None) -> MultiScenario:
    states = tuple(states)
    k = len(states)
    mu, u, pL, pH = (tuple(as_rational(x) for x in seq) for seq in (mu, u, pL, pH))
    if not all(len(seq) == k for seq in (mu, u, pL, pH)):
        raise AggregationError("per-state vectors must match the number of states")
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise AggregationError(f"agent count must be a positive integer, got {n!r}")
    for name, dist in (("mu", mu), ("pL", pL), ("pH", pH)):
        if any(w < 0 for w in dist) or sum(dist) != 1:
            raise AggregationError(f"{name} is not a distribution")
    if any(w == 0 for w in mu):
        raise ZeroDenominator("every state needs positive prior weight")
    if any(h == l for h, l in zip(pH, pL)):
        raise ZeroDenominator("pH and pL coincide on some state")
    if sum(p * x for p, x in zip(pH, u)) <= 0 or sum(p * x for p, x in zip(pL, u)) >= 0:
        raise SignViolation("need E_pH[u] > 0 and E_pL[u] < 0")
    # mu = alpha*pH + (1-alpha)*pL, with alpha the probability of the H signal
    solved = (mu[0] - pL[0]) / (pH[0] - pL[0])
    if alpha is not None and as_rational(alpha) != solved:
        raise MixtureViolation(f"alpha={alpha} inconsistent with the prior (solved {solved})")
    alpha = solved
    if not 0 < alpha < 1 or any(m != alpha * h + (1 - alpha) * l for m, h, l in zip(mu, pH, pL)):
        raise MixtureViolation("prior is not a strict mixture of pL and pH")
    a_high = tuple(h * (m - l) / (m * (h - l)) for m, h, l in zip(mu, pH, pL))
    assert all(0 <= a <= 1 for a in a_high)
    return MultiScenario(states, mu, u, pL, pH, int(n), a_high, alpha)


def multiscenario_from_binary(s: Scenario) -> MultiScenario:
    """The +-1 utility instance equivalent to guessing the binary state."""
    return build_multiscenario(
        (0, 1), (1 - s.mu, s.mu), (-1, 1), (1 - s.p1, s.p1), (1 - s.p2, s.p2), s.n
    )


def load_scenario_file(path) -> dict:
    """Read a scenario JSON file.

    Returns a dict with key ``"scenario"`` (a :class:`Scenario`, when the
    binary block or a posterior marginal is present), ``"marginal"`` and
    ``"multistate"`` when those blocks exist.
    """
    with open(path, encoding="utf-8") as fh:
        return parse_scenario_json(json.load(fh))


def parse_scenario_json(obj: dict) -> dict:
    if "n" not in obj:
        raise AggregationError("scenario file needs an agent count 'n'")
    n = obj["n"]
    out: dict = {}
    if "posterior_marginal" in obj:
        marginal = PosteriorMarginal(tuple(tuple(pair) for pair in obj["posterior_marginal"]))
        out["marginal"] = marginal
        out["scenario"] = binarize_posteriors(marginal, obj["mu"], n)
        if "p1" in obj and (out["scenario"].p1, out["scenario"].p2) != (
            as_rational(obj["p1"]),
            as_rational(obj["p2"]),
        ):
            raise PriorMismatch("p1/p2 disagree with the posterior marginal")
    elif "p1" in obj:
        out["scenario"] = build_scenario(obj["mu"], obj["p1"], obj["p2"], n)
    if "multistate" in obj:
        ms = obj["multistate"]
        out["multistate"] = build_multiscenario(
            ms["states"], ms["mu"], ms["u"], ms["pL"], ms["pH"], n, ms.get("alpha")
        )
    if not out:
        raise AggregationError("scenario file has neither p1/p2, a marginal, nor a multistate block")
    return out


def scenario_to_json(s: Scenario) -> dict:
    return {"mu": str(s.mu), "p1": str(s.p1), "p2": str(s.p2), "n": s.n}


def parse_rule(values: Iterable, n: int | None = None) -> AggregationRule:
    vals = tuple(as_rational(v) for v in values)
    return AggregationRule(len(vals) - 1 if n is None else n, vals)
