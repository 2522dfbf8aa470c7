"""Pure numpy implementations of the per-atom reductions.

Every function takes ``labels`` (atom index of each outcome, ``0..k-1``)
and returns one value per atom. The compiled module ``_kernels`` exposes
the same signatures.
"""

import numpy as np

INF = np.inf

# slack when comparing cumulative conditional probabilities to alpha
QUANTILE_SLACK = 1e-12


def atom_min(x, labels, k):
    out = np.full(k, INF)
    np.minimum.at(out, labels, x)
    return out


def atom_max(x, labels, k):
    out = np.full(k, -INF)
    np.maximum.at(out, labels, x)
    return out


def atom_mass(p, labels, k):
    out = np.zeros(k)
    np.add.at(out, labels, p)
    return out


def _half_mean(part, p, labels, k, mass):
    # part >= 0; +inf with positive weight makes the average +inf (0 * inf = 0)
    inf_hit = np.zeros(k, dtype=bool)
    np.logical_or.at(inf_hit, labels, np.isinf(part) & (p > 0))
    finite = np.where(np.isinf(part), 0.0, part)
    acc = np.zeros(k)
    np.add.at(acc, labels, p * finite)
    out = acc / mass
    out[inf_hit] = INF
    return out


def atom_expect(x, p, labels, k):
    mass = atom_mass(p, labels, k)
    plus = _half_mean(np.maximum(x, 0.0), p, labels, k, mass)
    minus = _half_mean(np.maximum(-x, 0.0), p, labels, k, mass)
    out = plus - np.where(np.isinf(minus), 0.0, minus)
    out[np.isinf(minus)] = -INF
    return out


def _groups(labels, k):
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(k + 1))
    return [order[bounds[a]:bounds[a + 1]] for a in range(k)]


def _tail_value(xs, qs, cap):
    """min of sum(q*z*x) over 0 <= z <= cap, sum(q*z) == 1, xs ascending."""
    remaining = 1.0
    total = 0.0
    saw_neg_inf = False
    saw_pos_inf = False
    for xv, qv in zip(xs, qs):
        if remaining <= 0.0:
            break
        w = min(cap * qv, remaining)
        remaining -= w
        if w <= 0.0:
            continue
        if xv == -INF:
            saw_neg_inf = True
        elif xv == INF:
            saw_pos_inf = True
        else:
            total += w * xv
    if saw_neg_inf:
        return -INF
    if saw_pos_inf:
        return INF
    return total


def atom_cvar(x, p, labels, k, alpha):
    out = np.empty(k)
    cap = 1.0 / alpha
    for a, idx in enumerate(_groups(labels, k)):
        order = idx[np.argsort(x[idx], kind="stable")]
        q = p[order] / p[order].sum()
        out[a] = _tail_value(x[order], q, cap)
    return out


def atom_upper_quantile(x, p, labels, k, alpha):
    out = np.empty(k)
    for a, idx in enumerate(_groups(labels, k)):
        vals = x[idx]
        q = p[idx] / p[idx].sum()
        support = np.unique(vals)
        cum = np.array([q[vals <= v].sum() for v in support])
        n_ok = int(np.count_nonzero(cum <= alpha + QUANTILE_SLACK))
        out[a] = support[n_ok] if n_ok < len(support) else INF
    return out
