"""Seeded random spaces, variables and processes for property checks.

Each sample index gets its own generator, ``default_rng([seed, index])``,
so instance ``i`` is reproducible on its own and independent of how many
instances are drawn or in which order they are checked.
"""

from __future__ import annotations

import math

import numpy as np

from .space import AdaptedProcess, FilteredSpace, RandomVariable

VALUE_LOW, VALUE_HIGH = -10.0, 10.0


def stream(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(index)])


def draw_values(rng: np.random.Generator, size: int, allow_inf: bool = True,
                zero_rate: float = 0.1, inf_rate: float = 0.08) -> np.ndarray:
    """Mixture of uniform ``[-10, 10]``, exact zeros and (optionally) +-inf."""
    vals = rng.uniform(VALUE_LOW, VALUE_HIGH, size)
    u = rng.random(size)
    vals[u < zero_rate] = 0.0
    if allow_inf:
        vals[(u >= zero_rate) & (u < zero_rate + inf_rate)] = math.inf
        vals[(u >= zero_rate + inf_rate) & (u < zero_rate + 2 * inf_rate)] = -math.inf
    return vals


def random_space(rng: np.random.Generator, max_n: int = 12, max_T: int = 4,
                 min_n: int = 2) -> FilteredSpace:
    n = int(rng.integers(min_n, max_n + 1))
    T = int(rng.integers(1, max_T + 1))
    perm = rng.permutation(n).tolist()
    parts = [[perm]]
    for t in range(1, T + 1):
        nxt = []
        for atom in parts[-1]:
            if len(atom) == 1 or (t < T and rng.random() < 0.3):
                nxt.append(atom)
                continue
            cuts = sorted(set(rng.integers(1, len(atom), size=int(rng.integers(1, len(atom))))))
            bounds = [0, *cuts, len(atom)]
            nxt.extend(atom[a:b] for a, b in zip(bounds, bounds[1:]))
        parts.append(nxt)
    w = rng.uniform(0.2, 1.0, n)
    probs = w / w.sum()
    probs[-1] = 1.0 - probs[:-1].sum()
    return FilteredSpace(list(range(n)), probs, parts)


def random_variable(space: FilteredSpace, rng: np.random.Generator, t: int | None = None,
                    allow_inf: bool = True) -> RandomVariable:
    """A random variable, F_t-measurable when ``t`` is given."""
    if t is None:
        return RandomVariable(space, draw_values(rng, space.n, allow_inf))
    per_atom = draw_values(rng, space.n_atoms(t), allow_inf)
    return space.broadcast(per_atom, t)


def random_process(space: FilteredSpace, rng: np.random.Generator,
                   allow_inf: bool = True) -> AdaptedProcess:
    rows = [random_variable(space, rng, t, allow_inf).values for t in range(space.T + 1)]
    return AdaptedProcess(space, rows)


def random_payoff(space, rng, kind: str, allow_inf: bool = True):
    if kind == "processes":
        return random_process(space, rng, allow_inf)
    return random_variable(space, rng, None, allow_inf)


def random_dominating(x, rng: np.random.Generator, allow_inf: bool = True):
    """A payoff ``y >= x`` (same kind and measurability)."""
    from . import extreal as xr

    sp = x.space
    if isinstance(x, RandomVariable):
        bump = np.abs(draw_values(rng, sp.n, allow_inf))
        bump[rng.random(sp.n) < 0.3] = 0.0
        return RandomVariable(sp, xr.xadd(x.values, bump))
    rows = x.rows.copy()
    for t in range(sp.T + 1):
        bump = np.abs(draw_values(rng, sp.n_atoms(t), allow_inf))
        bump[rng.random(bump.size) < 0.3] = 0.0
        rows[t] = xr.xadd(rows[t], bump[sp.labels[t]])
    return AdaptedProcess(sp, rows)
