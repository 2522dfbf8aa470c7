# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-atom reductions; signatures mirror ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

cdef double QUANTILE_SLACK = 1e-12


def atom_min(const double[::1] x, const long[::1] labels, Py_ssize_t k):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.full(k, INFINITY)
    cdef double[::1] o = out
    for i in range(n):
        if x[i] < o[labels[i]]:
            o[labels[i]] = x[i]
    return out


def atom_max(const double[::1] x, const long[::1] labels, Py_ssize_t k):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.full(k, -INFINITY)
    cdef double[::1] o = out
    for i in range(n):
        if x[i] > o[labels[i]]:
            o[labels[i]] = x[i]
    return out


def atom_mass(const double[::1] p, const long[::1] labels, Py_ssize_t k):
    cdef Py_ssize_t i, n = p.shape[0]
    out = np.zeros(k)
    cdef double[::1] o = out
    for i in range(n):
        o[labels[i]] += p[i]
    return out


def atom_expect(const double[::1] x, const double[::1] p, const long[::1] labels, Py_ssize_t k):
    cdef Py_ssize_t i, a, n = x.shape[0]
    cdef double v
    mass = np.zeros(k)
    plus = np.zeros(k)
    minus = np.zeros(k)
    pinf = np.zeros(k, dtype=np.uint8)
    minf = np.zeros(k, dtype=np.uint8)
    cdef double[::1] m = mass, pl = plus, mi = minus
    cdef unsigned char[::1] pi = pinf, ni = minf
    for i in range(n):
        a = labels[i]
        v = x[i]
        m[a] += p[i]
        if p[i] == 0.0:
            continue  # 0 * inf = 0
        if v == INFINITY:
            pi[a] = 1
        elif v == -INFINITY:
            ni[a] = 1
        elif v > 0:
            pl[a] += p[i] * v
        elif v < 0:
            mi[a] -= p[i] * v
    out = np.empty(k)
    cdef double[::1] o = out
    for a in range(k):
        if ni[a]:
            o[a] = -INFINITY
        elif pi[a]:
            o[a] = INFINITY
        else:
            o[a] = pl[a] / m[a] - mi[a] / m[a]
    return out


cdef void _sort_idx(const double[::1] x, long[::1] idx, Py_ssize_t cnt):
    # insertion sort; atoms hold a handful of outcomes
    cdef Py_ssize_t i, j
    cdef long key
    for i in range(1, cnt):
        key = idx[i]
        j = i - 1
        while j >= 0 and x[idx[j]] > x[key]:
            idx[j + 1] = idx[j]
            j -= 1
        idx[j + 1] = key


def _bucket(const long[::1] labels, Py_ssize_t k):
    cdef Py_ssize_t i, n = labels.shape[0]
    starts = np.zeros(k + 1, dtype=np.int64)
    cdef long[::1] st = starts
    for i in range(n):
        st[labels[i] + 1] += 1
    for i in range(k):
        st[i + 1] += st[i]
    fill = starts[:-1].copy()
    cdef long[::1] fl = fill
    members = np.empty(n, dtype=np.int64)
    cdef long[::1] mem = members
    for i in range(n):
        mem[fl[labels[i]]] = i
        fl[labels[i]] += 1
    return starts, members


def atom_cvar(const double[::1] x, const double[::1] p, const long[::1] labels, Py_ssize_t k, double alpha):
    starts, members = _bucket(labels, k)
    cdef long[::1] st = starts, mem = members
    cdef Py_ssize_t a, j, lo, hi
    cdef double mass, remaining, w, total, cap = 1.0 / alpha
    cdef bint neg_inf, pos_inf
    out = np.empty(k)
    cdef double[::1] o = out
    for a in range(k):
        lo = st[a]
        hi = st[a + 1]
        _sort_idx(x, mem[lo:hi], hi - lo)
        mass = 0.0
        for j in range(lo, hi):
            mass += p[mem[j]]
        remaining = 1.0
        total = 0.0
        neg_inf = False
        pos_inf = False
        for j in range(lo, hi):
            if remaining <= 0.0:
                break
            w = cap * p[mem[j]] / mass
            if w > remaining:
                w = remaining
            remaining -= w
            if w <= 0.0:
                continue
            if x[mem[j]] == -INFINITY:
                neg_inf = True
            elif x[mem[j]] == INFINITY:
                pos_inf = True
            else:
                total += w * x[mem[j]]
        if neg_inf:
            o[a] = -INFINITY
        elif pos_inf:
            o[a] = INFINITY
        else:
            o[a] = total
    return out


def atom_upper_quantile(const double[::1] x, const double[::1] p, const long[::1] labels, Py_ssize_t k, double alpha):
    starts, members = _bucket(labels, k)
    cdef long[::1] st = starts, mem = members
    cdef Py_ssize_t a, j, lo, hi
    cdef double mass, cum, result
    out = np.empty(k)
    cdef double[::1] o = out
    for a in range(k):
        lo = st[a]
        hi = st[a + 1]
        _sort_idx(x, mem[lo:hi], hi - lo)
        mass = 0.0
        for j in range(lo, hi):
            mass += p[mem[j]]
        cum = 0.0
        result = INFINITY
        j = lo
        while j < hi:
            # accumulate the whole tie block at this support point
            cum += p[mem[j]] / mass
            while j + 1 < hi and x[mem[j + 1]] == x[mem[j]]:
                j += 1
                cum += p[mem[j]] / mass
            if cum > alpha + QUANTILE_SLACK:
                result = x[mem[j]]
                break
            j += 1
        o[a] = result
    return out
