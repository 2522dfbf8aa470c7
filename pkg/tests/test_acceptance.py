"""Acceptance suite: one PASS/FAIL line per criterion (run with ``pytest -s`` to see them)."""

import itertools
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from tclab import duality, measures, rules, sampling
from tclab import extreal as xr
from tclab.condops import cond_essinf, cond_esssup, cond_expect
from tclab.consistency import (FULL, ONE_STEP, check_benchmark_tc, check_mu_tc,
                               check_projective_implies_weak, check_semiweak_tc, check_weak_tc,
                               gain_loss_chain)
from tclab.measures import LMMeasure, PROCESSES, VARIABLES
from tclab.space import AdaptedProcess, RandomVariable, s4
from tclab.transforms import arctan, cube
from tclab.treeio import s4_tree

EPS = 1e-9
INF = math.inf


def verdict(k, ok, detail):
    print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


# 1 -------------------------------------------------------------------------

def test_criterion_01_conventions():
    grid = [-INF, -1.0, 0.0, 1.0, INF]
    bad = []
    for a, b in itertools.product(grid, repeat=2):
        expected_sum = -INF if {a, b} == {INF, -INF} else a + b
        expected_prod = 0.0 if 0.0 in (a, b) else a * b
        if xr.add(a, b) != expected_sum or xr.mul(a, b) != expected_prod:
            bad.append((a, b))
        if math.isnan(xr.add(a, b)) or math.isnan(xr.mul(a, b)):
            bad.append((a, b, "nan"))
    S4 = s4()
    X = RandomVariable(S4, [INF, 2, -INF, INF])
    strict = (cond_expect(-X, 1).values[2] == -INF) and ((-cond_expect(X, 1)).values[2] == INF)
    verdict(1, not bad and strict,
            f"{len(grid) ** 2} grid pairs, {len(bad)} mismatches; "
            f"E[-X|F_1] = -inf < -E[X|F_1] = +inf on atom {{w3,w4}}: {strict}")


# 2 -------------------------------------------------------------------------

def _le(a, b):
    return bool(xr.xle(a, b, EPS).all())


def _eq(a, b):
    return bool(xr.xclose(a, b, EPS).all())


def appendix_violations(seed):
    rng = sampling.stream(seed, 2)
    sp = sampling.random_space(rng)
    X = sampling.random_variable(sp, rng)
    Y = sampling.random_variable(sp, rng)
    t = int(rng.integers(0, sp.T))
    s = int(rng.integers(t + 1, sp.T + 1))
    lam = sampling.random_variable(sp, rng, t, allow_inf=False)
    E = lambda Z, u: cond_expect(Z, u).values
    Xp, Yp, lp = X.map(np.abs), Y.map(np.abs), lam.map(np.abs)
    checks = {
        "E1 ineq": _le(E(lam * X, t), (lam * cond_expect(X, t)).values),
        "E1 eq": _eq(E(lp * X, t), (lp * cond_expect(X, t)).values),
        "E2 ineq": _le(E(X, t), E(cond_expect(X, s), t)),
        "E2 eq": _eq(E(Xp, t), E(cond_expect(Xp, s), t)),
        "E3 ineq": _le(xr.xadd(E(X, t), E(Y, t)), E(X + Y, t)),
        "E3 eq": _eq(xr.xadd(E(Xp, t), E(Yp, t)), E(Xp + Yp, t)),
    }
    inf_t = cond_essinf(X, t)
    checks["I1"] = all(min(X.values[list(a)]) == min(inf_t.values[list(a)]) for a in sp.atoms(t))
    U = sp.broadcast(np.array([min(X.values[list(a)]) for a in sp.atoms(t)]), t)
    checks["I2"] = U == inf_t
    checks["I3"] = bool((X.values >= inf_t.values).all())
    Z = sampling.random_variable(sp, rng, t).minimum(inf_t)
    checks["I4"] = bool((cond_essinf(X.maximum(Z), t).values >= Z.values).all())
    W = sampling.random_dominating(X, rng)
    checks["I5"] = bool((cond_essinf(W, t).values >= inf_t.values).all())
    checks["I6"] = all((sp.indicator(m) * inf_t) == (sp.indicator(m) * cond_essinf(sp.indicator(m) * X, t))
                       for m in sp.atom_unions(t))
    checks["I7"] = bool((cond_essinf(X, s).values >= inf_t.values).all())
    checks["sup mirror"] = cond_esssup(X, t) == -cond_essinf(-X, t)
    return [k for k, ok in checks.items() if not ok]


def test_criterion_02_appendix_propositions():
    failures = {}
    for seed in range(1000):
        bad = appendix_violations(seed)
        if bad:
            failures[seed] = bad
    verdict(2, not failures, f"1000 instances, {len(failures)} with violations {dict(list(failures.items())[:3])}")


# 3 -------------------------------------------------------------------------

def test_criterion_03_dual_representation():
    mismatches = 0
    with_inf = 0
    for i in range(500):
        rng = sampling.stream(3, i)
        sp = sampling.random_space(rng)
        t = int(rng.integers(0, sp.T + 1))
        m = sampling.random_variable(sp, rng)
        with_inf += bool(np.isinf(m.values).any())
        if not np.array_equal(duality.dual_essinf(m, t).values, cond_essinf(m, t).values):
            mismatches += 1
    verdict(3, mismatches == 0,
            f"500 instances ({with_inf} with infinite values), {mismatches} not bitwise equal")


# 4 -------------------------------------------------------------------------

def test_criterion_04_equivalences():
    lines = []
    ok = True
    for seed in range(20):
        kind = VARIABLES if seed % 2 == 0 else PROCESSES
        phi = measures.random_lm_measure(seed, kind, monetary=(seed % 4 == 0))
        for direction in ("accept", "reject"):
            if kind == VARIABLES:
                v = check_weak_tc(phi, direction, samples=25, seed=seed)
            else:
                v = check_semiweak_tc(phi, direction, samples=25, seed=seed, minimize=False)
            counts = {k: n for k, n in v.details.items() if k.startswith("condition_")}
            # check_* raise EquivalenceBroken on any per-instance disagreement
            ok &= len(set(counts.values())) == 1
            lines.append(f"{phi.name}/{direction}:{'holds' if v.holds else 'fails'}")
    held = sum(s.endswith("holds") for s in lines)
    verdict(4, ok, f"20 measures x 2 directions, conditions agreed on every instance; "
                   f"{held} consistent, {len(lines) - held} not")


# 5 -------------------------------------------------------------------------

def test_criterion_05_dglr():
    phi = measures.dglr_measure()
    acc = check_semiweak_tc(phi, "accept", samples=500, seed=5)
    rej = check_semiweak_tc(phi, "reject", samples=500, seed=5)
    chain_bad = 0
    for i in range(500):
        rng = sampling.stream(5, i)
        sp = sampling.random_space(rng)
        V = sampling.random_process(sp, rng, allow_inf=False)
        chain_bad += sum(not gain_loss_chain(V, t)[1] for t in range(sp.T))
    verdict(5, acc.holds and rej.holds and chain_bad == 0,
            f"accept holds={acc.holds} ({acc.checked}), reject holds={rej.holds} ({rej.checked}), "
            f"inequality-chain failures={chain_bad}")


# 6 -------------------------------------------------------------------------

def test_criterion_06_draroc():
    phi = measures.draroc_measure(0.5)
    acc = check_semiweak_tc(phi, "accept", samples=500, seed=0)
    rej = check_semiweak_tc(phi, "reject", samples=10_000, seed=0, stop_at_first=True)
    found = not rej.holds and rej.witness is not None
    verdict(6, acc.holds and found,
            f"accept holds={acc.holds} on {acc.checked}; reject violation found={found} "
            f"after {rej.checked} samples"
            + ("" if found else " (none found)"))


# 7 -------------------------------------------------------------------------

def test_criterion_07_converters():
    family = measures.raroc_family(0.5)
    worst = 0.0
    for i in range(200):
        rng = sampling.stream(7, i)
        sp = sampling.random_space(rng, max_n=8)
        V = sampling.random_process(sp, rng, allow_inf=False)
        t = int(rng.integers(0, sp.T + 1))
        got = duality.index_from_risk_family(family, t, V).values
        ref = measures.draroc(t, V, 0.5).values
        same_inf = (got == ref)
        with np.errstate(invalid="ignore"):
            err = np.where(same_inf, 0.0, np.abs(got - ref))
        worst = max(worst, float(np.nanmax(np.where(np.isnan(err), INF, err))))
    tree = s4_tree()
    V1 = tree.processes["V1"]
    dglr = measures.dglr_measure()
    c = duality.risk_family_from_index(dglr, 1.0, 0, V1).values[0]
    round_trip = 0.0
    for V in (V1, tree.processes["V2"], AdaptedProcess.terminal(tree.variables["R1"])):
        back = duality.index_from_risk_family(duality.risk_family(dglr), 0, V, x_max=1e3).values
        ref = dglr(0, V).values
        with np.errstate(invalid="ignore"):
            err = np.where(back == ref, 0.0, np.abs(back - ref))
        round_trip = max(round_trip, float(np.max(err)))
    ok = worst <= 1e-6 and abs(c + 1 / 3) <= 1e-6 and round_trip <= 10 * duality.TOL
    verdict(7, ok, f"index vs draroc max err {worst:.2e} on 200; fixture root {c:.10f} vs -1/3; "
                   f"round trip max err {round_trip:.2e} (bound {10 * duality.TOL:.0e})")


# 8 -------------------------------------------------------------------------

def test_criterion_08_projective_and_transforms():
    pairs = [(measures.random_lm_measure(seed), mu)
             for seed in range(10) for mu in (rules.essinf_rule(), rules.expectation_rule())]
    implication_fail = []
    transform_fail = []
    for j, (phi, mu) in enumerate(pairs):
        if not check_projective_implies_weak(phi, mu, samples=20, seed=j, classify_samples=10).holds:
            implication_fail.append((phi.name, mu.name))
        g = cube() if j % 2 == 0 else arctan()
        for direction in ("accept", "reject"):
            a = check_mu_tc(phi, mu, direction, FULL, extra_random=20, seed=j, cross_check=0,
                            minimize=False)
            b = check_mu_tc(measures.monotone_transform_measure(g, phi),
                            rules.monotone_transform_rule(g, mu), direction, FULL,
                            extra_random=20, seed=j, cross_check=0, minimize=False)
            if (a.holds, a.checked) != (b.holds, b.checked):
                transform_fail.append((phi.name, mu.name, g.name, direction))
    verdict(8, not implication_fail and not transform_fail,
            f"{len(pairs)} pairs; implication violations {implication_fail}; "
            f"transform disagreements {transform_fail}")


# 9 -------------------------------------------------------------------------

def sup_then_mean():
    return LMMeasure("sup-then-mean",
                     lambda t, X: cond_esssup(X, t) if t > 0 else cond_expect(X, 0))


def test_criterion_09_benchmark_equivalence():
    tree = s4_tree()
    sp = tree.space
    gen_sets = {"{0}": [0], "{m1}": [tree.variables["m1"]],
                "{X1,R1}": [tree.variables["X1"], tree.variables["R1"]]}
    phis = [measures.cond_expectation_measure(), sup_then_mean(), measures.random_lm_measure(1),
            measures.random_lm_measure(2)]
    disagreements = []
    tally = {"holds": 0, "fails": 0}
    for name, gens in gen_sets.items():
        for i in range(100):
            rng = sampling.stream(9, i)
            phi = phis[i % len(phis)]
            X = sampling.random_variable(sp, rng)
            direction = "accept" if i % 2 == 0 else "reject"
            a = check_benchmark_tc(phi, gens, direction, inputs=[X], samples=0).holds
            mu = rules.benchmark_rule(gens, phi, direction)
            b = check_mu_tc(phi, mu, direction, FULL, inputs=[X], extra_random=0,
                            cross_check=0, minimize=False).holds
            tally["holds" if a else "fails"] += 1
            if a != b:
                disagreements.append((name, i, phi.name, direction))
    verdict(9, not disagreements,
            f"3 generator sets x 100 instances; verdicts {tally}; disagreements {disagreements[:5]}")


# 10 ------------------------------------------------------------------------

def _cli(*args):
    return subprocess.run([sys.executable, "-m", "tclab", *args], capture_output=True, text=True)


def test_criterion_10_cli_determinism():
    first = _cli("demo", "--seed", "11", "--samples", "60")
    second = _cli("demo", "--seed", "11", "--samples", "60")
    identical = first.stdout == second.stdout and first.returncode == second.returncode
    demo_ok = all(v["holds"] for v in json.loads(first.stdout)["semiweak"].values())
    codes = []
    for args in (["check", "--measure", "dglr", "--rule", "semiweak:accept", "--samples", "40"],
                 ["check", "--measure", "cexp", "--rule", "discounted:0.5", "--direction", "reject",
                  "--samples", "40"],
                 ["dual-check", "--t", "1", "--var", "m1"]):
        out = _cli(*args)
        doc = json.loads(out.stdout)
        holds = doc["verdict"]["holds"] if "verdict" in doc else doc["equal"]
        codes.append(out.returncode == (0 if holds else 2))
    demo_code = first.returncode == (0 if demo_ok else 2)
    verdict(10, identical and all(codes) and demo_code,
            f"demo byte-identical={identical}; exit codes match verdicts={all(codes) and demo_code}")
