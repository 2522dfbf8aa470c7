"""Update rules ``mu_{t,s}(m, X)``: local, monotone maps from F_s levels to F_t levels."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from . import extreal as xr
from . import sampling
from ._core import kernels
from .condops import cond_essinf, cond_esssup, cond_expect
from .errors import (BadAlpha, EmptyBenchmark, KindMismatch, NotMeasurable, NotOneStep,
                     TimeOrder)
from .measures import PROCESSES, VARIABLES, LMMeasure
from .report import DEFAULT_EPS, PropertyReport, Verdict
from .space import AdaptedProcess, FilteredSpace, RandomVariable
from .transforms import MonotoneMap

ANY = "any"
ACCEPT, REJECT = "accept", "reject"


def check_direction(direction: str) -> str:
    if direction not in (ACCEPT, REJECT):
        raise ValueError(f"direction must be 'accept' or 'reject', got {direction!r}")
    return direction


class UpdateRule:
    """``rule(t, s, m, X)`` with declared class flags.

    ``kind`` is the payoff type the rule reads (``any`` when it ignores
    ``X``). One-step rules only accept ``s == t + 1``; use
    :func:`compose_nested` to reach further.
    """

    def __init__(self, name: str, evaluator: Callable, kind: str = ANY, *,
                 one_step: bool = False, x_invariant: bool = False,
                 sx_invariant: bool = False, projective: bool = False):
        self.name = name
        self.evaluator = evaluator
        self.kind = kind
        self.one_step = one_step
        self.x_invariant = x_invariant
        self.sx_invariant = sx_invariant
        self.projective = projective

    @property
    def declared(self) -> dict:
        return {"local": True, "monotone": True, "x_invariant": self.x_invariant,
                "sx_invariant": self.sx_invariant, "projective": self.projective}

    def accepts(self, kind: str) -> bool:
        return self.kind == ANY or self.kind == kind

    def __call__(self, t: int, s: int, m: RandomVariable, X=None) -> RandomVariable:
        sp = m.space
        sp.check_time(t)
        sp.check_time(s)
        if not t < s:
            raise TimeOrder(f"{self.name}: need t < s, got t={t}, s={s}")
        if self.one_step and s != t + 1:
            raise NotOneStep(f"{self.name} is one-step only, got t={t}, s={s}")
        if not m.is_measurable(s):
            raise NotMeasurable(f"{self.name}: level m is not F_{s}-measurable")
        if X is None:
            X = sp.zero_process() if self.kind == PROCESSES else sp.constant(0.0)
        elif self.kind == PROCESSES and not isinstance(X, AdaptedProcess):
            raise KindMismatch(f"{self.name} needs an adapted process")
        return self.evaluator(t, s, m, X)

    def __repr__(self):
        return f"UpdateRule({self.name!r})"


def essinf_rule() -> UpdateRule:
    return UpdateRule("essinf", lambda t, s, m, X: cond_essinf(m, t),
                      x_invariant=True, sx_invariant=True, projective=True)


def esssup_rule() -> UpdateRule:
    return UpdateRule("esssup", lambda t, s, m, X: cond_esssup(m, t),
                      x_invariant=True, sx_invariant=True, projective=True)


def expectation_rule() -> UpdateRule:
    return UpdateRule("expectation", lambda t, s, m, X: cond_expect(m, t),
                      x_invariant=True, sx_invariant=True, projective=True)


def discounted_rule(alpha: float) -> UpdateRule:
    """Shrink gains and inflate losses by ``alpha`` per period."""
    if not 0.0 < alpha < 1.0:
        raise BadAlpha(f"alpha={alpha} outside (0, 1)")

    def evaluate(t, s, m, X):
        e = cond_expect(m, t).values
        factor = np.where(e >= 0, alpha ** (s - t), alpha ** (t - s))
        return RandomVariable(m.space, xr.xmul(factor, e))

    return UpdateRule(f"discounted:{alpha:g}", evaluate, x_invariant=True)


def process_weak_rule(direction: str) -> UpdateRule:
    check_direction(direction)
    inner = cond_essinf if direction == ACCEPT else cond_esssup

    def evaluate(t, s, m, V):
        return RandomVariable(m.space, xr.xadd(inner(m, t).values, V.rows[t]))

    return UpdateRule(f"weak-process:{direction}", evaluate, PROCESSES, one_step=True)


def semiweak_rule(direction: str) -> UpdateRule:
    """Essinf (esssup) of the level where the dividend has the right sign, -inf (+inf) elsewhere."""
    check_direction(direction)

    def evaluate(t, s, m, V):
        v = V.rows[t]
        if direction == ACCEPT:
            out = np.where(v >= 0, cond_essinf(m, t).values, -np.inf)
        else:
            out = np.where(v <= 0, cond_esssup(m, t).values, np.inf)
        return RandomVariable(m.space, out)

    return UpdateRule(f"semiweak:{direction}", evaluate, PROCESSES, one_step=True)


# -- benchmark-induced rule -------------------------------------------------

SHIFT_GRID = np.concatenate([-(4.0 ** np.arange(20, -1, -1)), [0.0], 4.0 ** np.arange(0, 21)])
BISECT_ITERS = 200
BISECT_RTOL = 1e-13


def shift(Y, r_full: np.ndarray):
    """``Y + r``: cash added at the terminal date, so every ``phi_u`` with ``u <= T`` sees it."""
    if isinstance(Y, AdaptedProcess):
        rows = Y.rows.copy()
        rows[-1] = xr.xadd(rows[-1], r_full)
        return AdaptedProcess(Y.space, rows)
    return RandomVariable(Y.space, xr.xadd(Y.values, r_full))


def _atom_all(mask: np.ndarray, labels, k) -> np.ndarray:
    return kernels.atom_min(mask.astype(float), labels, k) > 0.5


def shift_boundary(pred: Callable[[np.ndarray], np.ndarray], k: int) -> np.ndarray:
    """Per atom, the sup of the down-set ``{r : pred(r)}`` over ``[-inf, inf]``.

    ``pred`` maps a per-atom shift vector to a per-atom boolean. Atoms where
    nothing is feasible get ``nan`` (callers treat that as "no benchmark").
    """
    out = np.full(k, np.nan)
    top = pred(np.full(k, np.inf))
    out[top] = np.inf
    bottom = pred(np.full(k, -np.inf))
    lo = np.full(k, np.nan)
    hi = np.full(k, np.nan)
    prev = None
    for r in SHIFT_GRID:
        ok = pred(np.full(k, r))
        lo = np.where(ok, r, lo)
        if prev is not None:
            first_bad = prev & ~ok & np.isnan(hi)
            hi = np.where(first_bad, r, hi)
        prev = ok
    todo = ~top & ~np.isnan(lo) & ~np.isnan(hi)
    capped = ~top & ~np.isnan(lo) & np.isnan(hi)
    out[capped] = lo[capped]
    out[~top & np.isnan(lo) & bottom] = -np.inf
    a, b = lo.copy(), hi.copy()
    for _ in range(BISECT_ITERS):
        width = np.where(todo, b - a, 0.0)
        if not np.any(width > BISECT_RTOL * np.maximum(1.0, np.abs(a))):
            break
        mid = np.where(todo, 0.5 * (a + b), 0.0)
        ok = pred(mid)
        a = np.where(todo & ok, mid, a)
        b = np.where(todo & ~ok, mid, b)
    out[todo] = a[todo]
    return out


def _as_generator(sp, kind, g):
    if isinstance(g, (RandomVariable, AdaptedProcess)):
        return g
    if np.ndim(g) == 0:
        g = np.full(sp.n, xr.ext(g))
    if kind == PROCESSES:
        return AdaptedProcess.terminal(RandomVariable(sp, g)) if np.ndim(g) == 1 else sp.process(g)
    return RandomVariable(sp, g)


def benchmark_rule(generators: Sequence, phi: LMMeasure, direction: str = ACCEPT) -> UpdateRule:
    """Rule induced by the benchmark family ``{Y + r}`` (0 always included).

    On each atom of F_t: the sup of ``phi_t(Y + r)`` over generators ``Y``
    and shifts ``r`` with ``phi_s(Y + r) <= m`` on the atom; ``-inf`` when no
    shift is feasible. The rejection form mirrors it (inf over
    ``phi_s(Y + r) >= m``, ``+inf`` when infeasible).
    """
    check_direction(direction)
    sign = 1.0 if direction == ACCEPT else -1.0
    gens = list(generators)
    if not gens:
        raise EmptyBenchmark("benchmark generator list is empty")

    def evaluate(t, s, m, X):
        sp = m.space
        zero = sp.zero_process() if phi.kind == PROCESSES else sp.constant(0.0)
        k, lab = sp.n_atoms(t), sp.labels[t]
        # the rejection form is the acceptance form in the variable -r
        best = np.full(k, -np.inf)
        for Y in [zero, *(_as_generator(sp, phi.kind, g) for g in gens)]:
            def feasible(q, Y=Y):
                lhs = phi(s, shift(Y, sign * q[lab])).values
                return _atom_all(sign * lhs <= sign * m.values, lab, k)

            q = shift_boundary(feasible, k)
            ok = ~np.isnan(q)
            if not ok.any():
                continue
            val = sign * kernels.atom_min(phi(t, shift(Y, sign * np.where(ok, q, 0.0)[lab])).values, lab, k)
            best = np.where(ok, np.maximum(best, val), best)
        return sp.broadcast(sign * best, t)

    suffix = "" if direction == ACCEPT else ":reject"
    return UpdateRule(f"benchmark:{phi.name}{suffix}", evaluate, phi.kind, x_invariant=True)


# -- composition and transforms ---------------------------------------------

def compose_nested(one_step: UpdateRule, t: int, s: int, m: RandomVariable, X=None) -> RandomVariable:
    """``mu_{t,t+1}( ... mu_{s-1,s}(m, X) ..., X)``."""
    if not t < s:
        raise TimeOrder(f"compose_nested needs t < s, got t={t}, s={s}")
    level = m
    for u in range(s - 1, t - 1, -1):
        level = one_step(u, u + 1, level, X)
    return level


def nested(one_step: UpdateRule) -> UpdateRule:
    """The multi-step rule generated by a one-step rule."""
    return UpdateRule(f"nested:{one_step.name}",
                      lambda t, s, m, X: compose_nested(one_step, t, s, m, X), one_step.kind,
                      x_invariant=one_step.x_invariant)


def monotone_transform_rule(g: MonotoneMap, mu: UpdateRule) -> UpdateRule:
    """``g(mu(g^{-1}(m), X))``.

    Projectivity survives only when ``g`` is onto: outside a bounded range
    ``g(g^{-1}(m))`` saturates and cannot return ``m``.
    """
    def evaluate(t, s, m, X):
        inner = mu(t, s, RandomVariable(m.space, g.inv(m.values)), X)
        return RandomVariable(m.space, g(inner.values))

    return UpdateRule(f"{g.name}o{mu.name}", evaluate, mu.kind, one_step=mu.one_step,
                      x_invariant=mu.x_invariant, sx_invariant=mu.sx_invariant,
                      projective=mu.projective and g.onto)


# -- classification ---------------------------------------------------------

def _random_pair(space: FilteredSpace, rng, one_step: bool):
    if one_step:
        t = int(rng.integers(0, space.T))
        return t, t + 1
    t = int(rng.integers(0, space.T))
    return t, int(rng.integers(t + 1, space.T + 1))


def _payoff(rule: UpdateRule, space, rng):
    kind = PROCESSES if rule.kind == PROCESSES else VARIABLES
    return sampling.random_payoff(space, rng, kind)


def _dominating_level(m: RandomVariable, s: int, rng) -> RandomVariable:
    sp = m.space
    bump = np.abs(sampling.draw_values(rng, sp.n_atoms(s)))
    bump[rng.random(bump.size) < 0.3] = 0.0
    return RandomVariable(sp, xr.xadd(m.values, bump[sp.labels[s]]))


def _first_diff(a: np.ndarray, b: np.ndarray, eps: float):
    bad = ~xr.xclose(a, b, eps)
    return int(np.argmax(bad)) if bad.any() else None


def classify(rule: UpdateRule, space: FilteredSpace, sample_count: int = 50, seed: int = 0,
             eps: float = DEFAULT_EPS) -> PropertyReport:
    """Randomised verdicts for locality, monotonicity and the invariance classes."""
    wit = dict.fromkeys(("local", "monotone", "x_invariant", "sx_invariant", "projective"))
    counts = dict.fromkeys(wit, 0)

    # fixed probes first so the simplest counterexamples surface
    for c in (1.0, 0.0, -1.0):
        for t in range(space.T):
            counts["projective"] += 1
            m_t = space.constant(c)
            got = rule(t, t + 1, m_t).values
            i = _first_diff(got, m_t.values, eps)
            if i is not None and wit["projective"] is None:
                wit["projective"] = {"t": t, "s": t + 1, "m": m_t, "output": got[i],
                                     "outcome": i, "reason": "mu_t(m_t) != m_t"}

    for i in range(sample_count):
        rng = sampling.stream(seed, i)
        t, s = _random_pair(space, rng, rule.one_step)
        m = sampling.random_variable(space, rng, s)
        X = _payoff(rule, space, rng)
        out = rule(t, s, m, X).values

        if wit["local"] is None:
            counts["local"] += 1
            for mask in space.atom_unions(t):
                m_a = RandomVariable(space, xr.xmul(mask.astype(float), m.values))
                j = _first_diff(np.where(mask, out, 0.0),
                                np.where(mask, rule(t, s, m_a, X).values, 0.0), eps)
                if j is not None:
                    wit["local"] = {"t": t, "s": s, "m": m, "X": X,
                                    "event": np.flatnonzero(mask).tolist(), "outcome": j}
                    break

        if wit["monotone"] is None:
            counts["monotone"] += 1
            hi = _dominating_level(m, s, rng)
            bad = ~xr.xle(out, rule(t, s, hi, X).values, eps)
            if bad.any():
                wit["monotone"] = {"t": t, "s": s, "m": m, "m_prime": hi, "X": X,
                                   "outcome": int(np.argmax(bad))}

        if wit["x_invariant"] is None:
            counts["x_invariant"] += 1
            j = _first_diff(out, rule(t, s, m, None).values, eps)
            if j is not None:
                wit["x_invariant"] = {"t": t, "s": s, "m": m, "X": X, "outcome": j}

        if wit["sx_invariant"] is None:
            counts["sx_invariant"] += 1
            m1 = sampling.random_variable(space, rng, t + 1)
            ref = rule(t, t + 1, m1).values
            last = t + 1 if rule.one_step else space.T
            for u in range(t + 1, last + 1):
                Xu = _payoff(rule, space, rng)
                j = _first_diff(ref, rule(t, u, m1, Xu).values, eps)
                if j is not None:
                    wit["sx_invariant"] = {"t": t, "s": u, "m": m1, "X": Xu, "outcome": j}
                    break

        if wit["projective"] is None:
            counts["projective"] += 1
            m_t = sampling.random_variable(space, rng, t)
            got = rule(t, t + 1, m_t).values
            j = _first_diff(got, m_t.values, eps)
            if j is not None:
                wit["projective"] = {"t": t, "s": t + 1, "m": m_t, "output": got[j],
                                     "outcome": j, "reason": "mu_t(m_t) != m_t"}

    if wit["projective"] is None and wit["sx_invariant"] is not None:
        wit["projective"] = dict(wit["sx_invariant"], reason="not sX-invariant")
    verdicts = {k: Verdict(wit[k] is None, counts[k], wit[k], seed, eps) for k in wit}
    return PropertyReport(rule.name, verdicts, rule.declared)
