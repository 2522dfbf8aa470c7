"""Generalized conditional operators on a finite filtered space.

On a finite space with strictly positive weights, "almost surely" means
"everywhere", so each operator reduces to an exact per-atom computation:

* ``cond_expect``   -- atom average of ``X+`` minus atom average of ``X-``,
  with ``inf - inf = -inf``;
* ``cond_essinf``   -- atom minimum (``cond_esssup`` is the atom maximum);
* ``cond_upper_quantile`` / ``worst_case_density`` -- the conditional upper
  quantile and the density concentrating on ``{m <= q}``.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from . import extreal as xr
from ._core import kernels
from .errors import BadAlpha, EmptyFamily, SpaceMismatch
from .space import RandomVariable


def _reduce(X: RandomVariable, t: int, per_atom) -> RandomVariable:
    sp = X.space
    t = sp.check_time(t)
    return RandomVariable(sp, per_atom[sp.labels[t]])


def _labels(X: RandomVariable, t: int):
    sp = X.space
    t = sp.check_time(t)
    return sp.labels[t], sp.n_atoms(t)


def cond_expect(X: RandomVariable, t: int) -> RandomVariable:
    lab, k = _labels(X, t)
    return _reduce(X, t, kernels.atom_expect(X.values, X.space.probs, lab, k))


def cond_essinf(X: RandomVariable, t: int) -> RandomVariable:
    lab, k = _labels(X, t)
    return _reduce(X, t, kernels.atom_min(X.values, lab, k))


def cond_esssup(X: RandomVariable, t: int) -> RandomVariable:
    lab, k = _labels(X, t)
    return _reduce(X, t, kernels.atom_max(X.values, lab, k))


def family_essinf(Xs: Sequence[RandomVariable], t: int | None = None) -> RandomVariable:
    """Pointwise infimum of a nonempty family on one space.

    ``t`` is accepted for symmetry with the other operators; the result is
    F_t-measurable whenever every member is.
    """
    Xs = list(Xs)
    if not Xs:
        raise EmptyFamily("essinf of an empty family")
    sp = Xs[0].space
    if any(x.space != sp for x in Xs[1:]):
        raise SpaceMismatch("family members live on different spaces")
    if t is not None:
        sp.check_time(t)
    return RandomVariable(sp, np.min(np.vstack([x.values for x in Xs]), axis=0))


def family_esssup(Xs: Sequence[RandomVariable], t: int | None = None) -> RandomVariable:
    return -family_essinf([-x for x in Xs], t)


def _check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise BadAlpha(f"alpha={alpha} must lie in (0, 1)")
    return float(alpha)


def cond_upper_quantile(m: RandomVariable, t: int, alpha: float) -> RandomVariable:
    """Per atom, the sup of thresholds ``y`` with ``P(m <= y | atom) <= alpha``.

    The feasible thresholds form a down-set whose supremum is the first
    support point at which the conditional CDF exceeds ``alpha``.
    """
    alpha = _check_alpha(alpha)
    lab, k = _labels(m, t)
    return _reduce(m, t, kernels.atom_upper_quantile(m.values, m.space.probs, lab, k, alpha))


def worst_case_density(m: RandomVariable, t: int, alpha: float) -> RandomVariable:
    """``1{m <= q} / E[1{m <= q} | F_t]`` with ``q`` the upper alpha-quantile."""
    q = cond_upper_quantile(m, t, alpha)
    ind = m.space.indicator(m.values <= q.values)
    norm = cond_expect(ind, t).values
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(norm > 0, ind.values / np.where(norm > 0, norm, 1.0), 0.0)
    return RandomVariable(m.space, z)


def cond_cvar(X: RandomVariable, t: int, alpha: float) -> RandomVariable:
    """``essinf over 0 <= Z <= 1/alpha, E[Z|F_t] = 1`` of ``E[Z X | F_t]``.

    Sorted-tail evaluation: the density loads ``1/alpha`` on the lowest
    outcomes of each atom until the conditional mass is exhausted.
    """
    if not 0.0 < alpha <= 1.0:
        raise BadAlpha(f"alpha={alpha} must lie in (0, 1]")
    if alpha == 1.0:
        return cond_expect(X, t)
    lab, k = _labels(X, t)
    return _reduce(X, t, kernels.atom_cvar(X.values, X.space.probs, lab, k, float(alpha)))


def expect_weighted(Z: RandomVariable, m: RandomVariable, t: int) -> RandomVariable:
    """``E[Z m | F_t]`` with ``0 * inf = 0``."""
    return cond_expect(RandomVariable(m.space, xr.xmul(Z.values, m.values)), t)
