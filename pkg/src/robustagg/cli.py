"""Command-line front end.

Every subcommand is a thin adapter over the library; ``--json`` prints
``{inputs, derived, outputs, exact}`` where ``outputs`` holds decimals and
``exact`` the same values as ``p/q`` strings.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import evaluate, fullgame, optimize
from .errors import AggregationError, BadConfig
from .feasible import supermajority_adversary
from .lp import to_lp_text
from .model import (
    AggregationRule,
    ReducedStructure,
    Scenario,
    as_rational,
    build_scenario,
    load_scenario_file,
    parse_rule,
    random_dictator,
    scenario_from_ab,
    threshold_rule,
)

# --- output -------------------------------------------------------------------


def _exact(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, dict):
        return {k: _exact(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_exact(x) for x in v]
    return v


def _decimal(v):
    if isinstance(v, Fraction):
        return float(v)
    if isinstance(v, dict):
        return {k: _decimal(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_decimal(x) for x in v]
    return v


def _text(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_text(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_text(x)}" for k, x in v.items()) + "}"
    if v is None:
        return "none"
    return str(v)


def _emit(args, inputs: dict, derived: dict, outputs: dict) -> None:
    if args.json:
        doc = {
            "inputs": _exact(inputs),
            "derived": _exact(derived),
            "outputs": _decimal(outputs),
            "exact": _exact(outputs),
        }
        print(json.dumps(doc, indent=2))
        return
    for k, v in {**derived, **outputs}.items():
        print(f"{k}={_text(v)}")


def _structure(rs: ReducedStructure) -> dict:
    return {
        "state0": {str(Fraction(k, rs.n)): w for k, w in enumerate(rs.dist0) if w},
        "state1": {str(Fraction(k, rs.n)): w for k, w in enumerate(rs.dist1) if w},
    }


# --- argument helpers ------------------------------------------------------------


def _add_scenario(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--scenario", type=Path, help="scenario JSON file")
    g.add_argument("--mu", help="prior probability of state 1")
    g.add_argument("--p1", help="posterior after an L signal")
    g.add_argument("--p2", help="posterior after an H signal")
    g.add_argument("--a", help="P(H | state 0), instead of p1/p2")
    g.add_argument("--b", help="P(H | state 1), instead of p1/p2")
    g.add_argument("--n", type=int, help="number of agents")


def _scenario(args) -> Scenario:
    if args.scenario:
        data = load_scenario_file(args.scenario)
        if "scenario" not in data:
            raise AggregationError("scenario file has no binary scenario")
        s = data["scenario"]
        return s.with_n(args.n) if args.n is not None else s
    if args.n is None or args.mu is None:
        raise _Usage("need --n and --mu (or --scenario)")
    if args.p1 is not None and args.p2 is not None:
        return build_scenario(args.mu, args.p1, args.p2, args.n)
    if args.a is not None and args.b is not None:
        return scenario_from_ab(args.mu, args.a, args.b, args.n)
    raise _Usage("need --p1/--p2 or --a/--b")


def _rule(args, n: int) -> AggregationRule:
    text = args.rule
    if text in (None, "identity", "dictator"):
        return random_dictator(n)
    if text.startswith("threshold:"):
        return threshold_rule(n, text.split(":", 1)[1])
    return parse_rule(text.split(","), n)


def _scenario_inputs(s: Scenario) -> dict:
    return {"mu": s.mu, "p1": s.p1, "p2": s.p2, "n": s.n}


def _ab(s: Scenario) -> dict:
    return {"a": s.a, "b": s.b}


class _Usage(Exception):
    pass


# --- subcommands -------------------------------------------------------------------


def cmd_derive(args) -> None:
    s = _scenario(args)
    _emit(args, _scenario_inputs(s), _ab(s), {"in_dictator_region": s.in_dictator_region()})


def cmd_regret_of_rule(args) -> None:
    s = _scenario(args)
    rule = _rule(args, s.n)
    summary = evaluate.summarize(rule, s)
    _emit(
        args,
        {**_scenario_inputs(s), "rule": list(rule.values)},
        _ab(s),
        {
            "regret": summary.regret,
            "worst_structure": _structure(summary.worst),
            "minimax": summary.minimax,
            "cavvex_bound": summary.bound,
        },
    )


def cmd_optimal_rule(args) -> None:
    s = _scenario(args)
    res = optimize.optimal_regret_rule(s, with_ranges=args.ranges)
    if args.dump_lp:
        Path(args.dump_lp).write_text(to_lp_text(res.program))
    out = {
        "rule": list(res.rule.values),
        "regret": res.regret,
        "mixture": [{"weight": w, **_structure(rs)} for w, rs in res.mixture],
    }
    if res.ranges is not None:
        out["ranges"] = [list(r) for r in res.ranges]
        out["unique"] = res.unique
    _emit(args, _scenario_inputs(s), _ab(s), out)


def cmd_minimax(args) -> None:
    s = _scenario(args)
    rule = _rule(args, s.n)
    _emit(
        args,
        {**_scenario_inputs(s), "rule": list(rule.values)},
        _ab(s),
        {"minimax": evaluate.minimax_value(rule, s), "dictator_minimax": (1 - s.mu) * (1 - s.a) + s.mu * s.b},
    )


def cmd_approx_ratio(args) -> None:
    s = _scenario(args)
    rule = _rule(args, s.n)
    ratio = evaluate.approx_ratio(rule, s, as_rational(args.tol))
    _emit(args, {**_scenario_inputs(s), "rule": list(rule.values), "tol": as_rational(args.tol)}, _ab(s), {"ratio": ratio})


def cmd_verify_dictator(args) -> None:
    s = _scenario(args)
    rep = optimize.verify_random_dictator(s)
    out = {
        "condition": rep.in_region,
        "N": rep.threshold,
        "Reg": rep.lp_value,
        "closed_form": rep.closed_form if rep.in_region else "not asserted",
        "value_matches": rep.value_matches if rep.in_region else "not asserted",
        "unique": rep.unique if rep.in_region else "not asserted",
        "rule": list(rep.rule.values),
    }
    _emit(args, _scenario_inputs(s), _ab(s), out)


def cmd_two_agent(args) -> None:
    if args.a is None or args.b is None:
        raise _Usage("two-agent needs --a and --b")
    sol = optimize.two_agent_closed_form(args.a, args.b)
    a, b = as_rational(args.a), as_rational(args.b)
    out = {
        "case": sol.case,
        "f(1/2)": sol.f_half,
        "Reg": sol.regret,
        "alternatives": [{"case": c, "f(1/2)": f, "Reg": r} for c, f, r in sol.alternatives],
    }
    _emit(args, {"a": a, "b": b, "mu": Fraction(1, 2), "n": 2}, {"a": a, "b": b}, out)


def cmd_gap_check(args) -> None:
    s = _scenario(args)
    rep = optimize.concavification_gap_check(s)
    _emit(
        args,
        _scenario_inputs(s),
        _ab(s),
        {"lp_regret": rep.lp_regret, "gap": rep.gap, "matches": rep.matches, "weights": list(rep.weights)},
    )


def cmd_multistate(args) -> None:
    if not args.scenario:
        raise _Usage("multistate needs --scenario with a multistate block")
    data = load_scenario_file(args.scenario)
    if "multistate" not in data:
        raise AggregationError("scenario file has no multistate block")
    ms = data["multistate"]
    if args.n is not None:
        ms = ms.with_n(args.n)
    res = optimize.optimal_regret_rule_multistate(ms)
    out = {
        "a": list(ms.a_high),
        "in_region": ms.in_dictator_region(),
        "rule": list(res.rule.values),
        "Reg": res.regret,
        "closed_form": res.closed_form if res.closed_form is not None else "not asserted",
        "matches_closed_form": res.matches_closed_form if res.closed_form is not None else "not asserted",
    }
    if res.ranges is not None:
        out["unique"] = res.unique
    inputs = {"states": list(ms.states), "mu": list(ms.mu), "u": list(ms.u), "n": ms.n}
    _emit(args, inputs, {"alpha": ms.alpha}, out)


def cmd_fullgame(args) -> None:
    s = _scenario(args)
    if args.mode == "both":
        rep = fullgame.anonymity_equivalence(s)
        out = {
            "reduced": rep.reduced,
            "count": rep.count,
            "set": rep.set,
            "symmetrized": rep.symmetrized_value,
            "equal": rep.holds,
        }
    else:
        res = fullgame.double_oracle(s, args.mode)
        out = {
            "mode": res.mode,
            "value": res.value,
            "rule": list(res.rule.values),
            "iterations": res.iterations,
            "history": [list(h) for h in res.history],
        }
    _emit(args, _scenario_inputs(s), _ab(s), out)


def cmd_supermajority_demo(args) -> None:
    n = args.n
    if n is None or n < 4:
        raise _Usage("supermajority-demo needs --n >= 4")
    tau = as_rational(args.tau)
    half = Fraction(1, 2)
    s = scenario_from_ab(half, half - Fraction(1, n), half + Fraction(1, n), n)
    rule = threshold_rule(n, tau)
    rs = supermajority_adversary(s, tau)
    from .evaluate import regret_at

    out = {
        "threshold_regret_constructed": regret_at(rule, rs, s.mu),
        "threshold_regret_worst": evaluate.worst_case_regret(rule, s)[0],
        "lower_bound": 1 - Fraction(4, n),
        "dictator_regret": evaluate.worst_case_regret(random_dictator(n), s)[0],
        "adversary": _structure(rs),
    }
    _emit(args, {**_scenario_inputs(s), "tau": tau}, _ab(s), out)


# --- sweeps ------------------------------------------------------------------------

QUANTITIES = (
    "region",
    "f_half",
    "optimal_regret",
    "dictator_regret",
    "closed_form",
    "in_region",
    "threshold_N",
)


def _axis(name: str, value) -> list[Fraction] | list[int]:
    if isinstance(value, dict):
        try:
            start, stop, num = as_rational(value["start"]), as_rational(value["stop"]), int(value["num"])
        except (KeyError, ValueError, TypeError) as exc:
            raise BadConfig(f"axis {name!r} needs start, stop and num") from exc
        if num < 1:
            raise BadConfig(f"axis {name!r} is empty")
        pts = [start] if num == 1 else [start + (stop - start) * i / (num - 1) for i in range(num)]
        if name == "n":
            if any(v.denominator != 1 for v in pts):
                raise BadConfig("axis 'n' must land on integers")
            return [int(v) for v in pts]
        return pts
    if isinstance(value, list):
        if not value:
            raise BadConfig(f"axis {name!r} is empty")
        return [int(v) if name == "n" else as_rational(v) for v in value]
    return [int(value) if name == "n" else as_rational(value)]


def load_sweep_config(obj: dict) -> tuple[list[str], list[dict], list[str]]:
    """Axes in grid order, the list of points, and the requested quantities."""
    if not isinstance(obj, dict):
        raise BadConfig("config must be a JSON object")
    if "mu" not in obj or "n" not in obj:
        raise BadConfig("config needs 'mu' and 'n'")
    if ("a" in obj) == ("p1" in obj):
        raise BadConfig("config needs exactly one of the (a, b) or (p1, p2) parametrizations")
    pair = ("a", "b") if "a" in obj else ("p1", "p2")
    if pair[1] not in obj:
        raise BadConfig(f"config gives {pair[0]!r} without {pair[1]!r}")
    names = ["mu", "n", *pair]
    axes = [_axis(k, obj[k]) for k in names]
    quantities = obj.get("quantities", list(QUANTITIES))
    unknown = [q for q in quantities if q not in QUANTITIES]
    if unknown:
        raise BadConfig(f"unknown quantities {unknown}")
    points = []

    def rec(i, acc):
        if i == len(names):
            points.append(dict(acc))
            return
        for v in axes[i]:
            acc[names[i]] = v
            rec(i + 1, acc)

    rec(0, {})
    if not points:
        raise BadConfig("empty grid")
    return names, points, quantities


def _point_row(point: dict, quantities: list[str]) -> dict:
    row: dict = {}
    try:
        if "a" in point:
            s = scenario_from_ab(point["mu"], point["a"], point["b"], point["n"])
        else:
            s = build_scenario(point["mu"], point["p1"], point["p2"], point["n"])
    except AggregationError:
        row["valid"] = False
        return row
    row.update(valid=True, a=s.a, b=s.b)
    two_agent = s.n == 2 and s.mu == Fraction(1, 2)
    opt = None
    for q in quantities:
        if q == "region":
            row[q] = optimize.two_agent_region(s.a, s.b) if two_agent else None
        elif q == "f_half":
            if two_agent:
                opt = opt or optimize.optimal_regret_rule(s)
                row[q] = opt.rule.values[1]
            else:
                row[q] = None
        elif q == "optimal_regret":
            opt = opt or optimize.optimal_regret_rule(s)
            row[q] = opt.regret
        elif q == "dictator_regret":
            row[q] = evaluate.worst_case_regret(random_dictator(s.n), s)[0]
        elif q == "closed_form":
            # whichever closed form applies at this point, blank if none
            if two_agent:
                row[q] = optimize.two_agent_closed_form(s.a, s.b).regret
            elif s.in_dictator_region():
                row[q] = optimize.dictator_regret(s)
            else:
                row[q] = None
        elif q == "in_region":
            row[q] = s.in_dictator_region()
        elif q == "threshold_N":
            row[q] = optimize.dictator_threshold(s.mu, s.p1, s.p2)
    return row


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, Fraction):
        return repr(float(v))
    return str(v)


def run_sweep(config: dict, out, jobs: int = 1) -> int:
    """Write the sweep CSV to the text stream ``out``; returns the row count."""
    names, points, quantities = load_sweep_config(config)
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            rows = list(pool.map(_point_row, points, [quantities] * len(points)))
    else:
        rows = [_point_row(p, quantities) for p in points]
    header = names + ["valid", "a_derived", "b_derived"] + quantities
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for p, row in zip(points, rows):
        cells = [_cell(p[k]) for k in names]
        cells += [_cell(row["valid"]), _cell(row.get("a")), _cell(row.get("b"))]
        cells += [_cell(row.get(q)) for q in quantities]
        writer.writerow(cells)
    return len(rows)


def cmd_sweep(args) -> None:
    try:
        config = json.loads(Path(args.config).read_text())
    except json.JSONDecodeError as exc:
        raise BadConfig(f"config is not valid JSON: {exc}") from exc
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            count = run_sweep(config, fh, args.jobs)
        if not args.json:
            print(f"wrote {count} rows to {args.out}", file=sys.stderr)
    else:
        run_sweep(config, sys.stdout, args.jobs)


# --- entry point -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustagg", description="Regret-robust aggregation of binary recommendations.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, scenario=True):
        p = sub.add_parser(name, help=help_text)
        if scenario:
            _add_scenario(p)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(func=func)
        return p

    add("derive", cmd_derive, "conditional H-probabilities a, b")
    p = add("regret-of-rule", cmd_regret_of_rule, "worst-case regret of a rule")
    p.add_argument("--rule", help="comma-separated values, 'identity', or 'threshold:TAU'")
    p = add("optimal-rule", cmd_optimal_rule, "regret-minimizing rule")
    p.add_argument("--ranges", action="store_true", help="report each value's range over all optimal rules")
    p.add_argument("--dump-lp", metavar="FILE", help="write the final working-set LP in CPLEX-LP format")
    p = add("minimax", cmd_minimax, "worst-case success probability of a rule")
    p.add_argument("--rule")
    p = add("approx-ratio", cmd_approx_ratio, "worst-case ratio to the Bayesian benchmark")
    p.add_argument("--rule")
    p.add_argument("--tol", default="1/1000000000")
    add("verify-dictator", cmd_verify_dictator, "check optimality and uniqueness of the random dictator")
    p = add("two-agent", cmd_two_agent, "closed-form optimum for two agents, uniform prior", scenario=False)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    add("gap-check", cmd_gap_check, "Jensen-gap witness for the optimal adversary mixture")
    p = add("multistate", cmd_multistate, "optimal rule for a finite state space", scenario=False)
    p.add_argument("--scenario", type=Path, required=True)
    p.add_argument("--n", type=int)
    p = add("fullgame", cmd_fullgame, "double oracle over full information structures")
    p.add_argument("--mode", choices=("count", "set", "both"), default="count")
    p = add("supermajority-demo", cmd_supermajority_demo, "threshold rule vs random dictator", scenario=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--tau", default="1/2")
    p = add("sweep", cmd_sweep, "parameter sweep to CSV", scenario=False)
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--out", type=Path)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except _Usage as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (AggregationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
