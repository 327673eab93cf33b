"""Exact rational linear programming.

A dense two-phase tableau simplex with Bland's pivoting rule. Arithmetic is
done in ``gmpy2.mpq``; inputs and outputs are :class:`fractions.Fraction`.
Duals follow the sensitivity convention ``dual_i = d(objective) / d(rhs_i)``,
so for a maximization the dual of a binding ``<=`` row is nonnegative.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

from .errors import MalformedProgram
from .model import as_rational

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_RELATIONS = ("<=", "=", ">=")
_ZERO = mpq(0)


def _q(x) -> mpq:
    x = as_rational(x)
    return mpq(x.numerator, x.denominator)


def _frac(x: mpq) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


@dataclass
class LinearProgram:
    """``sense`` in {"min", "max"}; rows are ``(coeffs, relation, rhs)`` with
    ``coeffs`` a ``{var_index: coefficient}`` dict; ``bounds[j] = (lo, hi)``
    with ``None`` for an infinite side. Default bounds are ``(0, None)``."""

    objective: list
    sense: str = "min"
    rows: list = field(default_factory=list)
    bounds: list | None = None

    def __post_init__(self):
        if self.bounds is None:
            self.bounds = [(0, None)] * len(self.objective)

    @property
    def num_vars(self) -> int:
        return len(self.objective)

    def add_row(self, coeffs, relation: str, rhs) -> int:
        if not isinstance(coeffs, dict):
            coeffs = {j: c for j, c in enumerate(coeffs) if c}
        self.rows.append((coeffs, relation, rhs))
        return len(self.rows) - 1

    def copy(self) -> "LinearProgram":
        return LinearProgram(list(self.objective), self.sense, list(self.rows), list(self.bounds))


@dataclass(frozen=True)
class LpSolution:
    status: str
    x: tuple = ()
    duals: tuple = ()
    objective: Fraction | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


def _validate(lp: LinearProgram) -> None:
    if lp.sense not in ("min", "max"):
        raise MalformedProgram(f"unknown sense {lp.sense!r}")
    nv = lp.num_vars
    if len(lp.bounds) != nv:
        raise MalformedProgram("bounds length differs from the number of variables")
    for lo, hi in lp.bounds:
        if lo is not None and hi is not None and as_rational(lo) > as_rational(hi):
            raise MalformedProgram(f"empty bound interval [{lo}, {hi}]")
    for coeffs, rel, _ in lp.rows:
        if rel not in _RELATIONS:
            raise MalformedProgram(f"unknown relation {rel!r}")
        if any(not 0 <= j < nv for j in coeffs):
            raise MalformedProgram("row references a variable out of range")


class _Tableau:
    """Standard form ``min c.y  s.t.  A y = b, y >= 0`` with ``b >= 0``."""

    def __init__(self, A: list, b: list, c: list, unit: list, artificial: set):
        self.m = len(A)
        self.ncols = len(c)
        self.rows = [row + [bi] for row, bi in zip(A, b)]
        self.c = c
        self.unit = unit  # column that started as e_i for each row
        self.artificial = artificial
        self.basis = list(unit)
        self.alive = [True] * self.m

    def _pivot(self, r: int, col: int, obj: list) -> None:
        prow = self.rows[r]
        inv = 1 / prow[col]
        prow = [v * inv for v in prow]
        self.rows[r] = prow
        nz = [j for j, v in enumerate(prow) if v]
        for i, row in enumerate(self.rows):
            if i != r and row[col]:
                f = row[col]
                for j in nz:
                    row[j] -= f * prow[j]
        f = obj[col]
        if f:
            for j in nz:
                obj[j] -= f * prow[j]
        self.basis[r] = col

    def _reduced_costs(self, cost: list) -> list:
        obj = list(cost) + [_ZERO]
        for i, row in enumerate(self.rows):
            cb = cost[self.basis[i]]
            if cb and self.alive[i]:
                for j, v in enumerate(row):
                    if v:
                        obj[j] -= cb * v
        return obj

    def _run(self, obj: list, banned: set) -> str:
        while True:
            col = next((j for j in range(self.ncols) if obj[j] < 0 and j not in banned), None)
            if col is None:
                return OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                if self.alive[i] and row[col] > 0:
                    key = (row[-1] / row[col], self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            self._pivot(best[1], col, obj)

    def solve(self) -> str:
        if self.artificial:
            cost1 = [mpq(int(j in self.artificial)) for j in range(self.ncols)]
            obj = self._reduced_costs(cost1)
            self._run(obj, set())
            if -obj[-1] > 0:
                return INFEASIBLE
            for i in range(self.m):
                if self.basis[i] in self.artificial:
                    row = self.rows[i]
                    col = next(
                        (j for j in range(self.ncols) if row[j] and j not in self.artificial),
                        None,
                    )
                    if col is None:
                        self.alive[i] = False  # redundant equality
                    else:
                        self._pivot(i, col, obj)
        self.obj = self._reduced_costs(self.c)
        return self._run(self.obj, self.artificial)

    def primal(self) -> list:
        y = [_ZERO] * self.ncols
        for i, j in enumerate(self.basis):
            if self.alive[i]:
                y[j] = self.rows[i][-1]
        return y

    def duals(self) -> list:
        # y_i = c_B B^{-1} e_i = c_u - d_u for the unit column u of row i
        out = []
        for i, u in enumerate(self.unit):
            cu = _ZERO if u in self.artificial else self.c[u]
            out.append(cu - self.obj[u] if self.alive[i] else _ZERO)
        return out


def solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly; the returned optimal solution is a basic one."""
    _validate(lp)
    sign = 1 if lp.sense == "min" else -1
    nv = lp.num_vars
    # x_j = offset_j + sum(s * y_col for col, s in terms_j)
    terms: list[list[tuple[int, int]]] = []
    offsets: list[mpq] = []
    bound_rows: list[tuple[int, mpq]] = []
    ncols = 0
    for lo, hi in lp.bounds:
        lo = None if lo is None else _q(lo)
        hi = None if hi is None else _q(hi)
        if lo is not None:
            terms.append([(ncols, 1)])
            offsets.append(lo)
            if hi is not None:
                bound_rows.append((ncols, hi - lo))
            ncols += 1
        elif hi is not None:
            terms.append([(ncols, -1)])
            offsets.append(hi)
            ncols += 1
        else:
            terms.append([(ncols, 1), (ncols + 1, -1)])
            offsets.append(_ZERO)
            ncols += 2
    nstruct = ncols

    raw = []  # (dense coeffs over structural cols, relation, rhs)
    for coeffs, rel, rhs in lp.rows:
        row = [_ZERO] * nstruct
        b = _q(rhs)
        for j, a in coeffs.items():
            a = _q(a)
            if not a:
                continue
            b -= a * offsets[j]
            for col, s in terms[j]:
                row[col] += s * a
        raw.append((row, rel, b))
    for col, width in bound_rows:
        row = [_ZERO] * nstruct
        row[col] = mpq(1)
        raw.append((row, "<=", width))

    nslack = sum(rel != "=" for _, rel, _ in raw)
    # decide flips and which rows need an artificial
    flips, slack_col, needs_art = [], [], []
    k = nstruct
    for row, rel, b in raw:
        flip = b < 0
        flips.append(flip)
        if rel == "=":
            slack_col.append(None)
            needs_art.append(True)
        else:
            s = 1 if rel == "<=" else -1
            if flip:
                s = -s
            slack_col.append((k, s))
            needs_art.append(s != 1)
            k += 1
    total = nstruct + nslack + sum(needs_art)
    A, bvec, unit, artificial = [], [], [], set()
    art = nstruct + nslack
    for i, (row, rel, b) in enumerate(raw):
        full = [(-v if flips[i] else v) for v in row] + [_ZERO] * (total - nstruct)
        if slack_col[i] is not None:
            col, s = slack_col[i]
            full[col] = mpq(s)
        if needs_art[i]:
            full[art] = mpq(1)
            unit.append(art)
            artificial.add(art)
            art += 1
        else:
            unit.append(slack_col[i][0])
        A.append(full)
        bvec.append(-b if flips[i] else b)

    c = [_ZERO] * total
    const = _ZERO
    for j, cj in enumerate(lp.objective):
        cj = _q(cj) * sign
        const += cj * offsets[j]
        for col, s in terms[j]:
            c[col] += s * cj

    tab = _Tableau(A, bvec, c, unit, artificial)
    status = tab.solve()
    if status != OPTIMAL:
        return LpSolution(status)
    y = tab.primal()
    x = []
    for j in range(nv):
        x.append(offsets[j] + sum((s * y[col] for col, s in terms[j]), _ZERO))
    ystd = tab.duals()
    duals = []
    for i in range(len(lp.rows)):
        d = -ystd[i] if flips[i] else ystd[i]
        duals.append(_frac(d * sign))
    xs = tuple(_frac(v) for v in x)
    objective = sum((as_rational(cj) * xj for cj, xj in zip(lp.objective, xs)), Fraction(0))
    sol = LpSolution(OPTIMAL, xs, tuple(duals), objective)
    audit(lp, sol)
    return sol


def audit(lp: LinearProgram, sol: LpSolution) -> bool:
    """Exact certificate check: primal feasibility, dual sign conditions,
    reduced-cost conditions at the bounds, and zero duality gap.

    Raises ``AssertionError`` describing the first violated condition.
    """
    assert sol.optimal, "only optimal solutions carry certificates"
    sign = 1 if lp.sense == "min" else -1
    x = sol.x
    for j, (lo, hi) in enumerate(lp.bounds):
        assert lo is None or x[j] >= as_rational(lo), f"x[{j}] below its lower bound"
        assert hi is None or x[j] <= as_rational(hi), f"x[{j}] above its upper bound"
    # work in min form: y = sign * dual
    reduced = [as_rational(cj) * sign for cj in lp.objective]
    dual_obj = Fraction(0)
    for (coeffs, rel, rhs), d in zip(lp.rows, sol.duals):
        lhs = sum((as_rational(a) * x[j] for j, a in coeffs.items()), Fraction(0))
        rhs = as_rational(rhs)
        y = d * sign
        if rel == "<=":
            assert lhs <= rhs, "a <= row is violated"
            assert y <= 0, "wrong dual sign on a <= row"
        elif rel == ">=":
            assert lhs >= rhs, "a >= row is violated"
            assert y >= 0, "wrong dual sign on a >= row"
        else:
            assert lhs == rhs, "an equality row is violated"
        assert y == 0 or lhs == rhs, "complementary slackness fails on a row"
        dual_obj += y * rhs
        for j, a in coeffs.items():
            reduced[j] -= y * as_rational(a)
    for j, (lo, hi) in enumerate(lp.bounds):
        r = reduced[j]
        if r > 0:
            assert lo is not None and x[j] == as_rational(lo), f"reduced cost of x[{j}] not supported"
            dual_obj += r * as_rational(lo)
        elif r < 0:
            assert hi is not None and x[j] == as_rational(hi), f"reduced cost of x[{j}] not supported"
            dual_obj += r * as_rational(hi)
    assert dual_obj == sol.objective * sign, "duality gap is nonzero"
    return True


def _pinned(lp: LinearProgram, sol: LpSolution, var_index: int, sense: str) -> LinearProgram:
    pinned = LinearProgram(
        [0] * lp.num_vars, sense, list(lp.rows), list(lp.bounds)
    )
    pinned.objective[var_index] = 1
    pinned.add_row(dict(enumerate(lp.objective)), "=", sol.objective)
    return pinned


def face_extreme(lp: LinearProgram, sol: LpSolution, var_index: int, sense: str) -> LpSolution:
    """Optimize a single variable over the optimal face of ``lp``."""
    if not sol.optimal:
        raise MalformedProgram("face probing needs an optimal solution")
    if not 0 <= var_index < lp.num_vars:
        raise MalformedProgram("variable index out of range")
    out = solve(_pinned(lp, sol, var_index, sense))
    if not out.optimal:
        raise MalformedProgram(f"face probe returned {out.status}")
    return out


def range_at_optimum(lp: LinearProgram, sol: LpSolution, var_index: int) -> tuple[Fraction, Fraction]:
    """``(min, max)`` of variable ``var_index`` over all optimal solutions."""
    lo = face_extreme(lp, sol, var_index, "min").objective
    hi = face_extreme(lp, sol, var_index, "max").objective
    return lo, hi


def _fmt(x) -> str:
    x = as_rational(x)
    return str(x.numerator) if x.denominator == 1 else repr(float(x))


def to_lp_text(lp: LinearProgram, names: Sequence[str] | None = None) -> str:
    """CPLEX-LP style dump for cross-checking with external solvers.

    Non-integer coefficients are written as decimal approximations.
    """
    names = list(names) if names else [f"x{j}" for j in range(lp.num_vars)]

    def expr(coeffs) -> str:
        parts = []
        for j, a in sorted(coeffs.items()):
            a = as_rational(a)
            if a:
                parts.append(("- " if a < 0 else "+ ") + f"{_fmt(abs(a))} {names[j]}")
        text = " ".join(parts) or "0 " + names[0]
        return text[2:] if text.startswith("+ ") else text

    lines = ["Minimize" if lp.sense == "min" else "Maximize"]
    lines.append(" obj: " + expr(dict(enumerate(lp.objective))))
    lines.append("Subject To")
    for i, (coeffs, rel, rhs) in enumerate(lp.rows):
        lines.append(f" c{i}: {expr(coeffs)} {rel} {_fmt(rhs)}")
    lines.append("Bounds")
    for j, (lo, hi) in enumerate(lp.bounds):
        if lo is None and hi is None:
            lines.append(f" {names[j]} free")
        else:
            lo_s = "-inf" if lo is None else _fmt(lo)
            hi_s = "+inf" if hi is None else _fmt(hi)
            lines.append(f" {lo_s} <= {names[j]} <= {hi_s}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def solve_matrix_game(payoffs: Sequence[Sequence]) -> tuple[Fraction, tuple, tuple]:
    """Value and optimal mixed strategies of a zero-sum matrix game in which
    the row player maximizes ``payoffs[i][j]``."""
    rows = [[as_rational(v) for v in r] for r in payoffs]
    m, k = len(rows), len(rows[0])
    # variables: p_0..p_{m-1}, v ; max v s.t. sum_i p_i A_ij >= v, sum p = 1
    lp = LinearProgram([0] * m + [1], "max", bounds=[(0, None)] * m + [(None, None)])
    for j in range(k):
        coeffs = {i: rows[i][j] for i in range(m) if rows[i][j]}
        coeffs[m] = -1
        lp.add_row(coeffs, ">=", 0)
    lp.add_row({i: 1 for i in range(m)}, "=", 1)
    sol = solve(lp)
    col_strategy = tuple(-d for d in sol.duals[:k])
    return sol.objective, sol.x[:m], col_strategy


class IncrementalLP:
    """Warm-started simplex for ``min c.x`` over ``lo <= x <= hi`` and rows
    ``a.x >= r``, all bounds finite.

    Kept as a dictionary: each basic variable is an affine function of the
    nonbasic ones, and every nonbasic variable sits at one of its bounds.
    Adding a row or tightening a bound keeps the reduced costs valid, so the
    dual simplex resumes from the current basis; a new objective keeps the
    basis primal feasible, so the primal simplex resumes. Both use Bland's
    smallest-index rule. Variable ``d + i`` is the surplus of row ``i``.
    """

    def __init__(self, bounds: Sequence[tuple]):
        self.d = len(bounds)
        self.lo = [_q(lo) for lo, _ in bounds]
        self.hi = [_q(hi) for _, hi in bounds]
        self.nonbasic = list(range(self.d))
        self.at_upper = [False] * self.d  # indexed by variable
        self.basic: list[int] = []
        self.rows: list[list] = []  # coefficients over self.nonbasic, then constant
        self.cost = [_ZERO] * self.d
        self.reduced = [_ZERO] * self.d
        self.row_data: list[tuple] = []
        self.pivots = 0

    # values -----------------------------------------------------------------
    def _nb_value(self, var: int) -> mpq:
        return self.hi[var] if self.at_upper[var] else self.lo[var]

    def _row_value(self, row: list) -> mpq:
        v = row[-1]
        for c, var in zip(row, self.nonbasic):
            if c:
                v += c * self._nb_value(var)
        return v

    def values(self) -> list:
        x = [_ZERO] * (self.d + len(self.row_data))
        for var in self.nonbasic:
            x[var] = self._nb_value(var)
        for row, var in zip(self.rows, self.basic):
            x[var] = self._row_value(row)
        return x

    # edits ------------------------------------------------------------------
    def _express(self, coeffs: dict) -> list:
        """``sum coeffs[j] x_j`` over structural variables, in nonbasic terms."""
        out = [_ZERO] * (self.d + 1)
        pos = {var: k for k, var in enumerate(self.nonbasic)}
        where = {var: i for i, var in enumerate(self.basic)}
        for j, a in coeffs.items():
            a = _q(a)
            if not a:
                continue
            if j in pos:
                out[pos[j]] += a
            else:
                for k, c in enumerate(self.rows[where[j]]):
                    if c:
                        out[k] += a * c
        return out

    def add_row(self, coeffs: dict, rhs) -> int:
        row = self._express(coeffs)
        row[-1] -= _q(rhs)
        self.row_data.append((dict(coeffs), _q(rhs)))
        var = self.d + len(self.row_data) - 1
        self.lo.append(_ZERO)
        self.hi.append(None)
        self.at_upper.append(False)
        self.basic.append(var)
        self.rows.append(row)
        return var

    def set_bounds(self, var: int, lo, hi) -> None:
        self.lo[var], self.hi[var] = _q(lo), _q(hi)

    def set_objective(self, cost: dict) -> None:
        self.cost = [_ZERO] * self.d
        for j, c in cost.items():
            self.cost[j] = _q(c)
        self.reduced = self._express(cost)[:-1]

    # pivoting ---------------------------------------------------------------
    def _pivot(self, r: int, s: int) -> None:
        """Exchange basic variable of row ``r`` with nonbasic column ``s``."""
        self.pivots += 1
        if self.pivots > 100000:
            raise RuntimeError("simplex iteration cap reached")
        prow = self.rows[r]
        piv = prow[s]
        leaving = self.basic[r]
        # x_s = (x_leaving - sum_{k != s} prow_k x_k - const) / piv
        inv = 1 / piv
        new = [-c * inv for c in prow]
        new[s] = inv
        nz = [k for k, c in enumerate(new) if c]
        for i, row in enumerate(self.rows):
            if i == r:
                continue
            f = row[s]
            if f:
                row[s] = _ZERO
                for k in nz:
                    row[k] += f * new[k]
        f = self.reduced[s]
        if f:
            self.reduced[s] = _ZERO
            for k in nz:
                if k < self.d:
                    self.reduced[k] += f * new[k]
        self.rows[r] = new
        self.basic[r] = self.nonbasic[s]
        self.nonbasic[s] = leaving

    def _dual_simplex(self) -> str:
        while True:
            pick = None
            for i, row in enumerate(self.rows):
                var = self.basic[i]
                v = self._row_value(row)
                if v < self.lo[var]:
                    cand = (var, i, True)
                elif self.hi[var] is not None and v > self.hi[var]:
                    cand = (var, i, False)
                else:
                    continue
                if pick is None or cand < pick:
                    pick = cand
            if pick is None:
                return OPTIMAL
            leaving, r, raise_it = pick
            row = self.rows[r]
            best = None
            for k, var in enumerate(self.nonbasic):
                a = row[k]
                if not a or self.lo[var] == self.hi[var]:
                    continue
                up = not self.at_upper[var]
                # moving x_var in its feasible direction must push the leaving
                # variable toward its violated bound
                if (a > 0) != (up == raise_it):
                    continue
                key = (abs(self.reduced[k] / a), var)
                if best is None or key < best[0]:
                    best = (key, k)
            if best is None:
                return INFEASIBLE
            self._pivot(r, best[1])
            self.at_upper[leaving] = not raise_it

    def _primal_simplex(self) -> str:
        while True:
            enter = None
            for k, var in enumerate(self.nonbasic):
                dk = self.reduced[k]
                if self.lo[var] == self.hi[var]:
                    continue
                if (dk < 0 and not self.at_upper[var]) or (dk > 0 and self.at_upper[var]):
                    if enter is None or var < self.nonbasic[enter]:
                        enter = k
            if enter is None:
                return OPTIMAL
            var = self.nonbasic[enter]
            up = not self.at_upper[var]
            step = None if self.hi[var] is None else self.hi[var] - self.lo[var]
            best = None  # ((ratio, basic var), row, to_upper)
            for i, row in enumerate(self.rows):
                a = row[enter]
                if not a:
                    continue
                rate = a if up else -a  # change of the basic var per unit step
                bvar = self.basic[i]
                v = self._row_value(row)
                if rate < 0:
                    ratio, to_upper = (v - self.lo[bvar]) / -rate, False
                elif self.hi[bvar] is not None:
                    ratio, to_upper = (self.hi[bvar] - v) / rate, True
                else:
                    continue
                key = (ratio, bvar)
                if best is None or key < best[0]:
                    best = (key, i, to_upper)
            if best is None or (step is not None and step <= best[0][0]):
                if step is None:
                    return UNBOUNDED
                self.at_upper[var] = up  # bound flip
                continue
            _, r, to_upper = best
            leaving = self.basic[r]
            self._pivot(r, enter)
            self.at_upper[leaving] = to_upper

    def _settle_nonbasic(self) -> None:
        for var in self.nonbasic:
            if self.hi[var] is None:
                self.at_upper[var] = False

    def _primal_feasible(self) -> bool:
        for row, var in zip(self.rows, self.basic):
            v = self._row_value(row)
            if v < self.lo[var] or (self.hi[var] is not None and v > self.hi[var]):
                return False
        return True

    def reoptimize(self) -> str:
        """Restore optimality after edits.

        Either the current point must stay feasible (objective changes,
        bounds the point already satisfies) or the reduced costs must stay
        valid (new rows, tighter bounds under the same objective).
        """
        self._settle_nonbasic()
        if not self._primal_feasible():
            status = self._dual_simplex()
            if status != OPTIMAL:
                return status
        return self._primal_simplex()

    def objective_value(self) -> mpq:
        x = self.values()
        return sum((c * v for c, v in zip(self.cost, x)), _ZERO)

    def row_duals(self) -> list:
        """``d objective / d rhs`` for each row."""
        pos = {var: k for k, var in enumerate(self.nonbasic)}
        out = []
        for i in range(len(self.row_data)):
            k = pos.get(self.d + i)
            out.append(_ZERO if k is None else self.reduced[k])
        return out

    def program(self, sense: str = "min") -> LinearProgram:
        lp = LinearProgram(
            [_frac(c) for c in self.cost],
            "min",
            bounds=[(_frac(lo), _frac(hi)) for lo, hi in zip(self.lo[: self.d], self.hi[: self.d])],
        )
        for coeffs, rhs in self.row_data:
            lp.add_row({j: as_rational(a) for j, a in coeffs.items()}, ">=", _frac(rhs))
        return lp
