"""Scenario-set oracles, the dual form of the conditional essinf, and the
index <-> risk-family converters."""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Optional

import numpy as np

from . import extreal as xr
from . import sampling
from ._core import kernels
from .condops import family_essinf
from .consistency import (ACCEPT, ONE_STEP, _violation, check_mu_tc, check_semiweak_tc,
                          instances)
from .errors import (BadAlpha, BracketExhausted, HypothesisFailed, NotDecreasingFamily,
                     NotTranslationInvariant)
from .measures import PROCESSES, VARIABLES, LMMeasure
from .report import DEFAULT_EPS, Verdict
from .rules import check_direction, process_weak_rule
from .space import AdaptedProcess, FilteredSpace, RandomVariable

P_T, D_ALPHA = "P_t", "D_alpha"


# -- vertices ---------------------------------------------------------------

def _atom_vertices_P(p: np.ndarray) -> list:
    mass = p.sum()
    out = []
    for j in range(p.size):
        z = np.zeros(p.size)
        z[j] = mass / p[j]
        out.append(z)
    return out


def _atom_vertices_D(p: np.ndarray, alpha: float) -> list:
    """Vertices of ``{0 <= z <= 1/alpha, sum p z = sum p}``: all coordinates
    at a bound except at most one."""
    cap = 1.0 / alpha
    mass = p.sum()
    found = {}
    for size in range(p.size + 1):
        for S in itertools.combinations(range(p.size), size):
            rest = mass - cap * p[list(S)].sum()
            others = [j for j in range(p.size) if j not in S]
            if abs(rest) <= 1e-12 * mass:
                z = np.zeros(p.size)
                z[list(S)] = cap
                found.setdefault(tuple(np.round(z, 12)), z)
                continue
            if rest < 0:
                continue
            for j in others:
                zj = rest / p[j]
                if zj <= cap * (1 + 1e-12):
                    z = np.zeros(p.size)
                    z[list(S)] = cap
                    z[j] = min(zj, cap)
                    found.setdefault(tuple(np.round(z, 12)), z)
    return list(found.values())


def atom_vertices(space: FilteredSpace, t: int, kind: str = P_T, alpha: float = 1.0) -> list:
    """Per atom of F_t, the vertex list of the admissible densities restricted to it."""
    if kind == D_ALPHA and not 0.0 < alpha <= 1.0:
        raise BadAlpha(f"alpha={alpha} outside (0, 1]")
    out = []
    for atom in space.atoms(t):
        p = space.probs[list(atom)]
        out.append(_atom_vertices_P(p) if kind == P_T else _atom_vertices_D(p, alpha))
    return out


def _assemble(space, t, choice) -> RandomVariable:
    z = np.empty(space.n)
    for atom, piece in zip(space.atoms(t), choice):
        z[list(atom)] = piece
    return RandomVariable(space, z)


def scenario_vertices(space: FilteredSpace, t: int, kind: str = P_T, alpha: float = 1.0) -> list:
    """All extreme points of the (product over atoms) density polytope."""
    per_atom = atom_vertices(space, t, kind, alpha)
    return [_assemble(space, t, c) for c in itertools.product(*per_atom)]


def covering_vertices(space: FilteredSpace, t: int, kind: str = P_T, alpha: float = 1.0) -> list:
    """Enough product vertices that every per-atom vertex appears in one of them.

    Conditional objectives separate over atoms, so a pointwise essinf over
    this short list equals the essinf over the full product.
    """
    per_atom = atom_vertices(space, t, kind, alpha)
    width = max(len(v) for v in per_atom)
    return [_assemble(space, t, [v[j % len(v)] for v in per_atom]) for j in range(width)]


def _worst_case(values: RandomVariable, t: int, Zs: list) -> RandomVariable:
    sp = values.space
    lab, k = sp.labels[t], sp.n_atoms(t)
    out = []
    for Z in Zs:
        # normalise p*Z per atom first so a point mass weighs exactly 1
        w = sp.probs * Z.values
        q = w / kernels.atom_mass(w, lab, k)[lab]
        out.append(sp.broadcast(kernels.atom_expect(values.values, q, lab, k), t))
    return family_essinf(out, t)


def dual_essinf(m: RandomVariable, t: int) -> RandomVariable:
    """``essinf_{Z in P_t} E[Z m | F_t]`` over the vertices of ``P_t``.

    Point masses carry the infinite values through ``0 * inf = 0``, which
    is where the limiting argument lands on a finite space.
    """
    return _worst_case(m, t, covering_vertices(m.space, t, P_T))


def cvar_by_vertices(X: RandomVariable, t: int, alpha: float) -> RandomVariable:
    """``essinf_{Z in D^alpha_t} E[Z X | F_t]`` by vertex enumeration."""
    return _worst_case(X, t, covering_vertices(X.space, t, D_ALPHA, alpha))


def raroc_family_by_vertices(x: float, t: int, V, alpha: float) -> RandomVariable:
    """``phi^x_t`` as a worst case over the mixture set ``1/(1+x) + x/(1+x) D^alpha_t``."""
    S = V.tail_sum(t) if isinstance(V, AdaptedProcess) else V
    Zs = [RandomVariable(S.space, 1.0 / (1.0 + x) + (x / (1.0 + x)) * Z.values)
          for Z in covering_vertices(S.space, t, D_ALPHA, alpha)]
    return _worst_case(S, t, Zs)


def robust_weak_check(phi: LMMeasure, inputs: Iterable = (), seed: int = 0, samples: int = 100,
                      eps: float = DEFAULT_EPS, space: Optional[FilteredSpace] = None) -> Verdict:
    """``phi_t(X) >= essinf_{Z in P_t} E[Z phi_s(X) | F_t]`` for all ``t < s``."""
    checked = 0
    for X in instances(VARIABLES, inputs, samples, seed, space, not phi.finite_domain):
        checked += 1
        sp = X.space
        for t in range(sp.T):
            lhs = phi(t, X)
            for s in range(t + 1, sp.T + 1):
                m = phi(s, X)
                rhs = dual_essinf(m, t)
                i = _violation(lhs.values, rhs.values, ACCEPT, eps)
                if i is not None:
                    w = {"X": X, "space": sp, "t": t, "s": s, "m": m, "outcome": i,
                         "lhs": lhs[i], "rhs": rhs[i], "margin": float(rhs[i] - lhs[i])}
                    return Verdict(False, checked, w, seed, eps, {"measure": phi.name})
    return Verdict(True, checked, None, seed, eps, {"measure": phi.name})


# -- converters -------------------------------------------------------------

X_MAX = 1e6
TOL = 1e-8
MAX_ITER = 200
_X_GRID = np.concatenate([[0.0], 2.0 ** np.arange(-6, 21)])


def _per_atom(space, t, full: np.ndarray) -> np.ndarray:
    return full[[a[0] for a in space.atoms(t)]]


def index_from_risk_family(family: Callable[[float], LMMeasure], t: int, V, x_max: float = X_MAX,
                           tol: float = TOL, max_iter: int = MAX_ITER,
                           eps: float = DEFAULT_EPS) -> RandomVariable:
    """``sup{x >= 0 : phi^x_t(V) >= 0}`` per atom; 0 when empty, ``+inf`` past ``x_max``."""
    sp = V.space
    k = sp.n_atoms(t)

    def f(x):
        return _per_atom(sp, t, family(float(x))(t, V).values)

    grid = _X_GRID[_X_GRID < x_max].tolist() + [x_max]
    vals = np.array([f(x) for x in grid])
    worse = ~xr.xle(vals[1:], vals[:-1], eps)
    if worse.any():
        j, a = np.argwhere(worse)[0]
        raise NotDecreasingFamily(
            f"family increases between x={grid[j]} and x={grid[j + 1]} on atom {a} at t={t}")
    out = np.empty(k)
    for a in range(k):
        ok = vals[:, a] >= 0
        if not ok[0]:
            out[a] = 0.0
            continue
        if ok[-1]:
            out[a] = np.inf
            continue
        j = int(np.argmin(ok))  # first grid point below zero
        lo, hi = grid[j - 1], grid[j]
        for _ in range(max_iter):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            if f(mid)[a] >= 0:
                lo = mid
            else:
                hi = mid
        out[a] = lo
    return sp.broadcast(out, t)


def index_measure(family: Callable[[float], LMMeasure], **kw) -> LMMeasure:
    """The acceptability index built from a decreasing family."""
    probe = family(0.0)
    return LMMeasure(f"index[{probe.name}]",
                     lambda t, V: index_from_risk_family(family, t, V, **kw), probe.kind,
                     finite_domain=probe.finite_domain)


def _cash_at(V, t: int, c: np.ndarray):
    if isinstance(V, AdaptedProcess):
        return V.add_at(t, RandomVariable(V.space, c))
    return RandomVariable(V.space, xr.xadd(V.values, c))


def check_index_hypotheses(index: LMMeasure, V, t: int, rng=None, draws: int = 3,
                           rtol: float = 1e-9) -> None:
    """Randomised check of translation invariance and independence of the past at ``(t, V)``."""
    sp = V.space
    if index.kind != PROCESSES:
        return
    rng = rng if rng is not None else sampling.stream(0, t)
    base = index(t, V).values

    def close(a, b):
        tol = rtol * (1.0 + np.abs(np.where(np.isfinite(b), b, 0.0)))
        with np.errstate(invalid="ignore"):
            return bool(np.all(xr.xclose(a, b, 0.0) | (np.abs(a - b) <= tol)))

    past = V.rows.copy()
    past[:t] = 0.0
    if not close(index(t, AdaptedProcess(sp, past)).values, base):
        raise NotTranslationInvariant(f"{index.name} depends on the past at t={t}")
    for _ in range(draws):
        m = sampling.random_variable(sp, rng, t, allow_inf=False).values
        now = index(t, V.add_at(t, RandomVariable(sp, m))).values
        for s in range(t + 1, sp.T + 1):
            later = index(t, V.add_at(s, RandomVariable(sp, m))).values
            if not close(now, later):
                raise NotTranslationInvariant(
                    f"{index.name}: cash at t={t} and at s={s} valued differently")


def risk_family_from_index(index: LMMeasure, x: float, t: int, V,
                           c_bracket: tuple = (-1e6, 1e6), tol: float = TOL,
                           max_iter: int = MAX_ITER, strict: bool = False,
                           verify: bool = True) -> RandomVariable:
    """``inf{c : alpha_t(V - c 1_t) <= x}`` per atom, ``+-inf`` past the bracket.

    With ``strict`` an exhausted bracket raises :class:`BracketExhausted`.
    """
    sp = V.space
    if verify:
        check_index_hypotheses(index, V, t)
    k = sp.n_atoms(t)
    lo_c, hi_c = map(float, c_bracket)

    def feasible(c):
        return _per_atom(sp, t, index(t, _cash_at(V, t, np.full(sp.n, -c))).values) <= x

    at_lo, at_hi = feasible(lo_c), feasible(hi_c)
    out = np.empty(k)
    for a in range(k):
        if at_lo[a] or not at_hi[a]:
            if strict:
                raise BracketExhausted(f"root for atom {a} at t={t} outside {c_bracket}")
            out[a] = -np.inf if at_lo[a] else np.inf
            continue
        lo, hi = lo_c, hi_c
        for _ in range(max_iter):
            if hi - lo <= tol:
                break
            mid = 0.5 * (lo + hi)
            if feasible(mid)[a]:
                hi = mid
            else:
                lo = mid
        out[a] = hi
    return sp.broadcast(out, t)


def risk_family(index: LMMeasure, **kw) -> Callable[[float], LMMeasure]:
    """``x -> phi^x`` built from an index."""
    def member(x: float) -> LMMeasure:
        return LMMeasure(f"risk[{index.name}]:{x:g}",
                         lambda t, V: risk_family_from_index(index, x, t, V, verify=False, **kw),
                         index.kind, monetary_utility=True, finite_domain=index.finite_domain)
    return member


# -- transfer of consistency --------------------------------------------------

def converter_consistency_transfer(source, direction: str = ACCEPT, inputs: Iterable = (),
                                   seed: int = 0, samples: int = 20,
                                   xs: Iterable[float] = (0.5, 1.0, 2.0),
                                   eps: float = DEFAULT_EPS) -> Verdict:
    """Check a converter's hypothesis on instances, then its conclusion.

    ``source`` is either a family ``x -> LMMeasure`` (family to index:
    weak process consistency of each member must give a semi-weakly
    consistent index) or an :class:`LMMeasure` index (index to family:
    semi-weak consistency of the index must give weakly consistent
    members). A failed hypothesis raises :class:`HypothesisFailed`.
    """
    check_direction(direction)
    inputs = list(inputs)
    xs = list(xs)
    # a bisected measure is only as exact as its tolerance
    tol_eps = max(eps, 10 * TOL)
    weak = process_weak_rule(direction)
    if isinstance(source, LMMeasure):
        hyp = check_semiweak_tc(source, direction, inputs, seed, samples, eps)
        if not hyp.holds:
            raise HypothesisFailed(f"{source.name} is not semi-weakly {direction} consistent",
                                   hyp.witness)
        for V in instances(PROCESSES, inputs, min(samples, 5), seed, None, False):
            for t in range(V.space.T + 1):
                check_index_hypotheses(source, V, t)
        family = risk_family(source)
        results = {}
        for x in xs:
            v = check_mu_tc(family(x), weak, direction, ONE_STEP, inputs, samples, seed,
                            tol_eps, cross_check=0, minimize=False)
            results[f"x={x:g}"] = v.holds
            if not v.holds:
                return Verdict(False, v.checked, dict(v.witness, x=x), seed, tol_eps, results)
        return Verdict(True, samples + len(inputs), None, seed, tol_eps, results)

    for x in xs:
        v = check_mu_tc(source(x), weak, direction, ONE_STEP, inputs, samples, seed, eps,
                        cross_check=0, minimize=False)
        if not v.holds:
            raise HypothesisFailed(
                f"member x={x:g} is not weakly {direction} consistent for processes",
                dict(v.witness, x=x))
    idx = index_measure(source)
    v = check_semiweak_tc(idx, direction, inputs, seed, samples, tol_eps, minimize=False)
    return Verdict(v.holds, v.checked, v.witness, seed, tol_eps, {"index": idx.name, **v.details})
