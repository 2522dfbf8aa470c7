"""Command line: ``tclab <command> [options]``.

Reports go to stdout as JSON with sorted keys; diagnostics go to stderr.
Exit status is 0 when the checked property holds, 2 when it is violated
and 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional

import numpy as np

from . import __version__
from . import duality, measures, rules
from .condops import cond_essinf
from .consistency import FULL, ONE_STEP, check_mu_tc, check_semiweak_tc
from .errors import TclabError, UnknownIdentifier, UsageError
from .measures import PROCESSES, VARIABLES, LMMeasure
from .report import DEFAULT_EPS, jsonable
from .space import AdaptedProcess
from .treeio import Tree, load_tree, s4_tree

EXIT_HOLDS, EXIT_ERROR, EXIT_VIOLATED = 0, 1, 2


# -- registries ---------------------------------------------------------------

def _float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise UnknownIdentifier(f"{what}: {text!r} is not a number") from None


def measure_by_id(ident: str, kind: Optional[str] = None) -> LMMeasure:
    """``cexp``, ``dglr``, ``draroc:<alpha>``, ``raroc-family:<alpha>:<x>``.

    ``kind`` adapts the measure to the payoff at hand: process measures are
    applied to terminal payoffs, ``cexp`` has a process form.
    """
    head, _, rest = ident.partition(":")
    if head == "cexp" and not rest:
        m = (measures.process_expectation_measure() if kind == PROCESSES
             else measures.cond_expectation_measure())
    elif head == "dglr" and not rest:
        m = measures.dglr_measure()
    elif head == "draroc" and rest:
        m = measures.draroc_measure(_float(rest, "alpha"))
    elif head == "raroc-family" and rest.count(":") == 1:
        a, x = rest.split(":")
        m = measures.raroc_family(_float(a, "alpha"))(_float(x, "x"))
    else:
        raise UnknownIdentifier(f"unknown measure {ident!r}")
    if kind == VARIABLES and m.kind == PROCESSES:
        m = m.on_variables()
    return m


def family_by_id(ident: str):
    head, _, rest = ident.partition(":")
    if head in ("raroc", "raroc-family") and rest:
        return measures.raroc_family(_float(rest, "alpha"))
    raise UnknownIdentifier(f"unknown risk family {ident!r}")


def _generators(tree: Tree, names: str):
    if names in ("zero", "0"):
        return [0.0]
    gens = []
    for name in names.split("+"):
        if name in tree.variables:
            gens.append(tree.variables[name])
        elif name in tree.processes:
            gens.append(tree.processes[name])
        else:
            raise UnknownIdentifier(f"benchmark set: no variable or process named {name!r}")
    return gens


def rule_by_id(ident: str, tree: Optional[Tree] = None, direction: str = "accept",
               kind: Optional[str] = None) -> rules.UpdateRule:
    head, _, rest = ident.partition(":")
    if ident == "essinf":
        return rules.essinf_rule()
    if ident == "esssup":
        return rules.esssup_rule()
    if ident == "expectation":
        return rules.expectation_rule()
    if head == "discounted" and rest:
        return rules.discounted_rule(_float(rest, "alpha"))
    if head == "weak-process" and rest in ("accept", "reject"):
        return rules.process_weak_rule(rest)
    if head == "semiweak" and rest in ("accept", "reject"):
        return rules.semiweak_rule(rest)
    if head == "benchmark" and rest.count(":") >= 1:
        names, measure_id = rest.split(":", 1)
        gens = _generators(tree or s4_tree(), names)
        if kind is None and any(isinstance(g, AdaptedProcess) for g in gens):
            kind = PROCESSES
        phi = measure_by_id(measure_id, kind)
        return rules.benchmark_rule(gens, phi, direction)
    raise UnknownIdentifier(f"unknown update rule {ident!r}")


def _payoffs(tree: Tree, var: Optional[str], proc: Optional[str]) -> dict:
    if var is not None:
        if var not in tree.variables:
            raise UnknownIdentifier(f"no variable named {var!r} in the tree")
        return {var: tree.variables[var]}
    if proc is not None:
        if proc not in tree.processes:
            raise UnknownIdentifier(f"no process named {proc!r} in the tree")
        return {proc: tree.processes[proc]}
    return {**tree.processes, **{k: AdaptedProcess.terminal(v) for k, v in tree.variables.items()}}


# -- commands -----------------------------------------------------------------

def _settings(args) -> dict:
    return {"seed": args.seed, "eps": args.eps, "tol": args.tol, "samples": args.samples,
            "version": __version__}


def cmd_evaluate(args, tree: Tree):
    kind = PROCESSES if args.process is not None else VARIABLES
    phi = measure_by_id(args.measure, kind)
    name, X = next(iter(_payoffs(tree, args.var, args.process).items()))
    value = phi(args.t, X)
    return {"measure": phi.name, "payoff": name, "t": args.t, "value": value}, EXIT_HOLDS


def _rule_direction(ident: str, given: Optional[str]) -> str:
    """``--direction`` if given, else the rule's own ``:accept``/``:reject`` suffix."""
    head, _, rest = ident.partition(":")
    own = rest if head in ("semiweak", "weak-process") and rest in ("accept", "reject") else None
    if given and own and given != own:
        raise UsageError(f"rule {ident!r} conflicts with --direction {given}")
    return given or own or "accept"


def cmd_check(args, tree: Tree):
    args.direction = _rule_direction(args.rule, args.direction)
    rule_kind = rule_by_id(args.rule, tree, args.direction).kind
    kind = PROCESSES if rule_kind == PROCESSES else (args.kind or VARIABLES)
    phi = measure_by_id(args.measure, kind)
    mu = rule_by_id(args.rule, tree, args.direction, kind=phi.kind)
    pool = tree.processes if phi.kind == PROCESSES else tree.variables
    inputs = list(pool.values())
    if phi.finite_domain:
        inputs = [x for x in inputs if np.isfinite(x.rows if isinstance(x, AdaptedProcess) else x.values).all()]
    space = None if args.random_spaces else tree.space
    verdict = check_mu_tc(phi, mu, args.direction, args.scope, inputs, args.samples, args.seed,
                          args.eps, space)
    return {"verdict": verdict}, EXIT_HOLDS if verdict.holds else EXIT_VIOLATED


def cmd_dual_check(args, tree: Tree):
    m = _payoffs(tree, args.var, None)[args.var]
    dual = duality.dual_essinf(m, args.t)
    direct = cond_essinf(m, args.t)
    equal = dual.close(direct, args.eps)
    return ({"variable": args.var, "t": args.t, "dual": dual, "essinf": direct, "equal": equal},
            EXIT_HOLDS if equal else EXIT_VIOLATED)


def cmd_convert(args, tree: Tree):
    out = {}
    payoffs = _payoffs(tree, args.var, args.process)
    if args.direction == "index-to-risk":
        index = measure_by_id(args.index, PROCESSES)
        for name, V in payoffs.items():
            V = V if isinstance(V, AdaptedProcess) else AdaptedProcess.terminal(V)
            out[name] = duality.risk_family_from_index(index, args.x, args.t, V,
                                                       (args.c_low, args.c_high), args.tol)
        return {"index": index.name, "x": args.x, "t": args.t, "values": out}, EXIT_HOLDS
    family = family_by_id(args.family)
    for name, V in payoffs.items():
        V = V if isinstance(V, AdaptedProcess) else AdaptedProcess.terminal(V)
        out[name] = duality.index_from_risk_family(family, args.t, V, args.x_max, args.tol)
    return {"family": args.family, "t": args.t, "values": out}, EXIT_HOLDS


def cmd_classify(args, tree: Tree):
    rule = rule_by_id(args.rule, tree)
    report = rules.classify(rule, tree.space, args.samples, args.seed, args.eps)
    return {"report": report}, EXIT_VIOLATED if report.contradictions else EXIT_HOLDS


def cmd_axioms(args, tree: Tree):
    phi = measure_by_id(args.measure, args.kind)
    report = measures.check_lm_axioms(phi, tree.space, args.samples, args.seed, args.eps)
    ok = all(v.holds for v in report.verdicts.values())
    return {"report": report}, EXIT_HOLDS if ok else EXIT_VIOLATED


def cmd_demo(args, tree: Tree):
    """Headline results on the four-outcome fixture plus seeded random spaces."""
    fixture = s4_tree()
    V1, R1 = fixture.processes["V1"], AdaptedProcess.terminal(fixture.variables["R1"])
    dglr, draroc = measures.dglr_measure(), measures.draroc_measure(0.5)
    semi = {}
    for phi in (dglr, draroc):
        for direction in ("accept", "reject"):
            semi[f"{phi.name}/{direction}"] = check_semiweak_tc(
                phi, direction, seed=args.seed, samples=args.samples, eps=args.eps)
    m1 = fixture.variables["m1"]
    report = {
        "evaluate": {
            "dglr(V1, t=0)": measures.dglr(0, V1),
            "draroc:0.5(R1, t=0)": measures.draroc(0, R1, 0.5),
            "cvar:0.5(R1, t=0)": measures.cvar_rho(0, R1, 0.5),
        },
        "semiweak": semi,
        "dual_check": {"dual": duality.dual_essinf(m1, 1), "essinf": cond_essinf(m1, 1)},
        "converters": {
            "index_from_raroc_family(R1, t=0)": duality.index_from_risk_family(
                measures.raroc_family(0.5), 0, R1, tol=args.tol),
            "risk_family_from_dglr(x=1, V1, t=0)": duality.risk_family_from_index(
                dglr, 1.0, 0, V1, tol=args.tol),
        },
    }
    ok = all(v.holds for v in semi.values())
    return report, EXIT_HOLDS if ok else EXIT_VIOLATED


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tree", help="scenario-tree JSON (default: built-in four-outcome fixture)")
    common.add_argument("--seed", type=int, default=0, help="overridden by $TCLAB_SEED")
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--eps", type=float, default=DEFAULT_EPS)
    common.add_argument("--tol", type=float, default=duality.TOL)
    common.add_argument("--format", choices=("json", "text"), default="json")

    p = argparse.ArgumentParser(prog="tclab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"tclab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("evaluate", parents=[common], help="evaluate a measure")
    e.add_argument("--measure", required=True)
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--var")
    g.add_argument("--process")
    e.add_argument("--t", type=int, default=0)
    e.set_defaults(run=cmd_evaluate)

    c = sub.add_parser("check", parents=[common], help="mu-acceptance/rejection consistency")
    c.add_argument("--measure", required=True)
    c.add_argument("--rule", required=True)
    c.add_argument("--direction", choices=("accept", "reject"),
                   help="default: the rule's own direction, else accept")
    c.add_argument("--scope", choices=(ONE_STEP, FULL), default=ONE_STEP)
    c.add_argument("--kind", choices=(VARIABLES, PROCESSES))
    c.add_argument("--random-spaces", action="store_true",
                   help="draw each random instance on its own random space")
    c.set_defaults(run=cmd_check)

    d = sub.add_parser("dual-check", parents=[common], help="dual form of the conditional essinf")
    d.add_argument("--t", type=int, required=True)
    d.add_argument("--var", required=True)
    d.set_defaults(run=cmd_dual_check)

    v = sub.add_parser("convert", parents=[common], help="index <-> risk family converters")
    v.add_argument("direction", choices=("index-to-risk", "risk-to-index"))
    v.add_argument("--index", default="dglr")
    v.add_argument("--family", default="raroc:0.5")
    v.add_argument("--x", type=float, default=1.0)
    v.add_argument("--t", type=int, default=0)
    v.add_argument("--var")
    v.add_argument("--process")
    v.add_argument("--x-max", type=float, default=duality.X_MAX)
    v.add_argument("--c-low", type=float, default=-1e6)
    v.add_argument("--c-high", type=float, default=1e6)
    v.set_defaults(run=cmd_convert)

    r = sub.add_parser("classify-rule", parents=[common], help="classify an update rule")
    r.add_argument("--rule", required=True)
    r.set_defaults(run=cmd_classify, samples=50)

    a = sub.add_parser("axioms", parents=[common], help="locality and monotonicity of a measure")
    a.add_argument("--measure", required=True)
    a.add_argument("--kind", choices=(VARIABLES, PROCESSES))
    a.set_defaults(run=cmd_axioms, samples=50)

    m = sub.add_parser("demo", parents=[common], help="rerun the headline results")
    m.set_defaults(run=cmd_demo, samples=200)
    return p


def _text(obj, prefix: str = "") -> list:
    """Flatten a report to ``dotted.key: value`` lines."""
    if isinstance(obj, dict):
        return [line for k in sorted(obj) for line in _text(obj[k], f"{prefix}{k}.")]
    if isinstance(obj, list) and any(isinstance(i, (dict, list)) for i in obj):
        return [line for i, v in enumerate(obj) for line in _text(v, f"{prefix}{i}.")]
    return [f"{prefix.rstrip('.')}: {json.dumps(obj)}"]


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    env_seed = os.environ.get("TCLAB_SEED")
    if env_seed:
        args.seed = int(env_seed)
    if not (args.eps > 0 and args.tol > 0):
        print("tclab: --eps and --tol must be positive", file=sys.stderr)
        return EXIT_ERROR
    if not -2 ** 63 <= args.seed < 2 ** 64:
        print("tclab: seed must fit in 64 bits", file=sys.stderr)
        return EXIT_ERROR
    try:
        tree = load_tree(args.tree) if args.tree else s4_tree()
        body, code = args.run(args, tree)
    except (TclabError, OSError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True),
              file=sys.stderr)
        return EXIT_ERROR
    doc = jsonable({"command": args.command, "settings": _settings(args), **body})
    if args.format == "text":
        print("\n".join(_text(doc)))
    else:
        print(json.dumps(doc, sort_keys=True, indent=2))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
