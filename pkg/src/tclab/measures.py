"""Dynamic LM-measures: local, monotone maps ``phi_t`` into F_t-measurable values."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from . import extreal as xr
from . import sampling
from .condops import cond_cvar, cond_expect
from .errors import BadAlpha, BadX, KindMismatch
from .report import DEFAULT_EPS, PropertyReport, Verdict
from .space import AdaptedProcess, FilteredSpace, RandomVariable, restrict
from .transforms import MonotoneMap

VARIABLES = "variables"
PROCESSES = "processes"


class LMMeasure:
    """A family ``{phi_t}`` evaluated as ``measure(t, X)``.

    ``kind`` says whether arguments are random variables or adapted
    processes. The boolean flags are declarations; ``check_lm_axioms`` and
    the converter checks test them rather than trust them.
    """

    def __init__(self, name: str, evaluator: Callable, kind: str = VARIABLES, *,
                 monetary_utility: bool = False, translation_invariant: bool = False,
                 independent_of_past: bool = False, finite_domain: bool = False):
        if kind not in (VARIABLES, PROCESSES):
            raise ValueError(f"unknown measure kind {kind!r}")
        self.name = name
        self.evaluator = evaluator
        self.kind = kind
        self.monetary_utility = monetary_utility
        self.translation_invariant = translation_invariant
        self.independent_of_past = independent_of_past
        # argument values are drawn finite when sampling for this measure
        self.finite_domain = finite_domain

    def __call__(self, t: int, X) -> RandomVariable:
        want = AdaptedProcess if self.kind == PROCESSES else RandomVariable
        if not isinstance(X, want):
            raise KindMismatch(f"{self.name} expects {self.kind}, got {type(X).__name__}")
        X.space.check_time(t)
        return self.evaluator(t, X)

    def on_variables(self) -> "LMMeasure":
        """Restrict a process measure to terminal payoffs ``(0, ..., 0, X)``."""
        if self.kind == VARIABLES:
            return self
        inner = self
        return LMMeasure(f"{self.name}|terminal",
                         lambda t, X: inner(t, AdaptedProcess.terminal(X)), VARIABLES,
                         monetary_utility=self.monetary_utility,
                         finite_domain=self.finite_domain)

    def __repr__(self):
        return f"LMMeasure({self.name!r}, kind={self.kind!r})"


def _tail(V, t: int) -> RandomVariable:
    return V.tail_sum(t) if isinstance(V, AdaptedProcess) else V


def cond_expectation_measure() -> LMMeasure:
    return LMMeasure("cexp", lambda t, X: cond_expect(X, t), VARIABLES, monetary_utility=True)


def process_expectation_measure() -> LMMeasure:
    """``E[V_t + ... + V_T | F_t]``."""
    return LMMeasure("cexp-process", lambda t, V: cond_expect(V.tail_sum(t), t), PROCESSES,
                     monetary_utility=True, translation_invariant=True,
                     independent_of_past=True)


def dglr(t: int, V) -> RandomVariable:
    """Dynamic gain-loss ratio of the cumulative future cash flow.

    ``E[S|F_t] / E[S^-|F_t]`` where the numerator is positive (``+inf`` if
    there are no expected losses), 0 elsewhere; ``S = V_t + ... + V_T``.
    """
    S = _tail(V, t)
    num = cond_expect(S, t).values
    den = cond_expect(RandomVariable(S.space, xr.xnegpart(S.values)), t).values
    out = np.zeros_like(num)
    pos = num > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), math.inf)
    out[pos] = ratio[pos]
    return RandomVariable(S.space, out)


def _check_alpha(alpha, upper_closed=False):
    ok = 0.0 < alpha <= 1.0 if upper_closed else 0.0 < alpha < 1.0
    if not ok:
        raise BadAlpha(f"alpha={alpha} outside {'(0, 1]' if upper_closed else '(0, 1)'}")
    return float(alpha)


def cvar_rho(t: int, V, alpha: float) -> RandomVariable:
    """Worst conditional expectation of the future cash flow over densities
    ``0 <= Z <= 1/alpha`` with ``E[Z|F_t] = 1``."""
    alpha = _check_alpha(alpha, upper_closed=True)
    return cond_cvar(_tail(V, t), t, alpha)


def draroc(t: int, V, alpha: float) -> RandomVariable:
    """Dynamic RAROC: ``E[S|F_t] / (-rho)``, ``+inf`` where ``rho >= 0``, 0 where ``E[S|F_t] <= 0``."""
    alpha = _check_alpha(alpha)
    S = _tail(V, t)
    num = cond_expect(S, t).values
    rho = cond_cvar(S, t, alpha).values
    out = np.zeros_like(num)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = num / np.where(rho < 0, -rho, 1.0)
    pos = num > 0
    out[pos] = ratio[pos]
    out[rho >= 0] = math.inf
    return RandomVariable(S.space, out)


def raroc_risk_family(x: float, t: int, V, alpha: float) -> RandomVariable:
    """Coherent family behind dRAROC, closed form of the mixture scenario set:
    ``E[S|F_t]/(1+x) + x * rho/(1+x)``."""
    alpha = _check_alpha(alpha)
    if not (x >= 0) or math.isinf(x):
        raise BadX(f"x={x} must be a finite nonnegative number")
    S = _tail(V, t)
    mean = cond_expect(S, t).values
    rho = cond_cvar(S, t, alpha).values
    out = xr.xadd(xr.xmul(mean, 1.0 / (1.0 + x)), xr.xmul(rho, x / (1.0 + x)))
    return RandomVariable(S.space, out)


def dglr_measure() -> LMMeasure:
    return LMMeasure("dglr", dglr, PROCESSES, translation_invariant=True,
                     independent_of_past=True, finite_domain=True)


def draroc_measure(alpha: float) -> LMMeasure:
    _check_alpha(alpha)
    return LMMeasure(f"draroc:{alpha:g}", lambda t, V: draroc(t, V, alpha), PROCESSES,
                     translation_invariant=True, independent_of_past=True,
                     finite_domain=True)


def raroc_family(alpha: float) -> Callable[[float], LMMeasure]:
    """``x -> phi^x`` as LM-measures on processes."""
    _check_alpha(alpha)

    def member(x: float) -> LMMeasure:
        if not (x >= 0):
            raise BadX(f"x={x} must be nonnegative")
        return LMMeasure(f"raroc-family:{alpha:g}:{x:g}",
                         lambda t, V: raroc_risk_family(x, t, V, alpha), PROCESSES,
                         monetary_utility=True, translation_invariant=True,
                         independent_of_past=True, finite_domain=True)

    member.alpha = alpha
    return member


def monotone_transform_measure(g: MonotoneMap, measure: LMMeasure) -> LMMeasure:
    """``{g o phi_t}``; still local and monotone for increasing ``g``."""
    return LMMeasure(f"{g.name}o{measure.name}",
                     lambda t, X: RandomVariable(X.space, g(measure(t, X).values)),
                     measure.kind, finite_domain=measure.finite_domain)


def esssup_measure() -> LMMeasure:
    """``phi_t(X) = Esssup_t X``; non-increasing in ``t``."""
    from .condops import cond_esssup
    return LMMeasure("esssup", lambda t, X: cond_esssup(X, t), VARIABLES)


def essinf_measure() -> LMMeasure:
    from .condops import cond_essinf
    return LMMeasure("essinf", lambda t, X: cond_essinf(X, t), VARIABLES)


# -- axiom checks -----------------------------------------------------------

def check_locality(measure: LMMeasure, X, eps: float = DEFAULT_EPS):
    """Exhaustive over nonempty F_t-events; returns a witness dict or None."""
    sp = X.space
    for t in range(sp.T + 1):
        full = measure(t, X).values
        for mask in sp.atom_unions(t):
            local = measure(t, restrict(mask, X, t)).values
            bad = mask & ~xr.xclose(full, local, eps)
            if bad.any():
                w = int(np.argmax(bad))
                return {"X": X, "t": t, "event": np.flatnonzero(mask).tolist(),
                        "outcome": w, "phi": full[w], "phi_restricted": local[w]}
    return None


def check_monotone_pair(measure: LMMeasure, X, Y, eps: float = DEFAULT_EPS):
    """For ``X <= Y``: witness where ``phi_t(X) > phi_t(Y) + eps``, else None."""
    for t in range(X.space.T + 1):
        lo = measure(t, X).values
        hi = measure(t, Y).values
        bad = ~xr.xle(lo, hi, eps)
        if bad.any():
            w = int(np.argmax(bad))
            return {"X": X, "Y": Y, "t": t, "outcome": w, "phi_X": lo[w], "phi_Y": hi[w]}
    return None


def check_lm_axioms(measure: LMMeasure, space: FilteredSpace, sample_count: int = 50,
                    seed: int = 0, eps: float = DEFAULT_EPS) -> PropertyReport:
    allow_inf = not measure.finite_domain
    loc_w = mono_w = None
    loc_n = mono_n = 0
    for i in range(sample_count):
        rng = sampling.stream(seed, i)
        X = sampling.random_payoff(space, rng, measure.kind, allow_inf)
        if loc_w is None:
            loc_n += 1
            loc_w = check_locality(measure, X, eps)
        if mono_w is None:
            Y = sampling.random_dominating(X, rng, allow_inf)
            mono_n += 1
            mono_w = check_monotone_pair(measure, X, Y, eps)
    return PropertyReport(
        measure.name,
        {"locality": Verdict(loc_w is None, loc_n, loc_w, seed, eps),
         "monotonicity": Verdict(mono_w is None, mono_n, mono_w, seed, eps)},
        {"locality": True, "monotonicity": True},
    )


# -- randomised local-monotone measures ---------------------------------------

def random_lm_measure(seed: int, kind: str = VARIABLES, monetary: bool = False) -> LMMeasure:
    """A seeded LM-measure built atom by atom.

    ``phi_t(X) = g(l1 E_Q[X|F_t] + l2 Essinf_t X + l3 Esssup_t X + c_t)`` with
    nonnegative weights, a reweighting ``Q`` and atom shifts ``c_t``. For processes ``X`` is the cumulative future flow
    plus ``kappa V_t``. With ``monetary`` the weights sum to 1 and there is
    no shift or transform, so the measure is cash additive with
    ``phi_t(0) = 0``.
    """
    from ._core import kernels
    from .transforms import arctan, cube

    rng = np.random.default_rng([int(seed), 0x7C])
    # half of the draws are a single component with a fixed Q, no shift and
    # no dividend weight: these tend to be consistent, the rest tend not to be
    pure = rng.random() < 0.5
    lam = np.eye(3)[rng.integers(3)] if pure else rng.dirichlet(np.ones(3))
    if not monetary and not pure:
        lam = lam * rng.uniform(0.5, 2.0)
    kappa = 0.0
    if kind == PROCESSES and not pure and rng.random() < 0.5:
        kappa = float(rng.uniform(0.0, 1.0))
    q_seed = int(rng.integers(2 ** 32))
    shift_scale = 0.0 if monetary or pure else float(rng.uniform(0.0, 2.0))
    g = None
    if not monetary and rng.random() < 0.3:
        g = cube() if rng.random() < 0.5 else arctan()

    def evaluate(t, X):
        sp = X.space
        if isinstance(X, AdaptedProcess):
            base = xr.xadd(X.tail_sum(t).values, xr.xmul(kappa, X.rows[t]))
        else:
            base = X.values
        qrng = np.random.default_rng([q_seed, sp.n, sp.T, 0 if pure else t + 1])
        w = qrng.uniform(0.2, 1.0, sp.n)
        k, lab = sp.n_atoms(t), sp.labels[t]
        val = xr.xadd(xr.xadd(xr.xmul(lam[0], kernels.atom_expect(base, w, lab, k)),
                              xr.xmul(lam[1], kernels.atom_min(base, lab, k))),
                      xr.xmul(lam[2], kernels.atom_max(base, lab, k)))
        val = xr.xadd(val, shift_scale * qrng.uniform(-1.0, 1.0, k))
        if g is not None:
            val = g(val)
        return sp.broadcast(val, t)

    tag = ("m" if monetary else "g" if g is not None else "p") + ("1" if pure else "")
    return LMMeasure(f"random-{tag}:{seed}", evaluate, kind, monetary_utility=monetary)
