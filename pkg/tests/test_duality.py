import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from tclab import duality, measures, sampling
from tclab.condops import cond_cvar, cond_essinf
from tclab.consistency import check_weak_tc
from tclab.duality import D_ALPHA, P_T
from tclab.errors import BadAlpha, BracketExhausted, HypothesisFailed, NotDecreasingFamily, \
    NotTranslationInvariant
from tclab.measures import LMMeasure, PROCESSES
from tclab.space import RandomVariable

from conftest import assert_values, terminal

INF = math.inf
seeds = st.integers(0, 2 ** 40)


def const_family(value):
    return lambda x: LMMeasure(f"const:{value}", lambda t, V: V.space.constant(value), PROCESSES)


def test_vertices_P(S4):
    per_atom = duality.atom_vertices(S4, 1, P_T)
    assert [z.tolist() for z in per_atom[0]] == [[2, 0], [0, 2]]
    assert len(duality.scenario_vertices(S4, 1, P_T)) == 4


def test_vertices_D(S4):
    assert [z.values.tolist() for z in duality.scenario_vertices(S4, 0, D_ALPHA, 1.0)] == [[1] * 4]
    verts = sorted(tuple(z.values) for z in duality.scenario_vertices(S4, 0, D_ALPHA, 0.5))
    expected = sorted({p for p in __import__("itertools").permutations((2.0, 2.0, 0.0, 0.0))})
    assert verts == expected
    with pytest.raises(BadAlpha):
        duality.scenario_vertices(S4, 0, D_ALPHA, 1.5)


def lp_min(c, p, cap):
    """min sum p z c  s.t. 0 <= z <= cap, sum p z = 1 (per atom, probs normalised)."""
    res = linprog(p * c, A_eq=[p], b_eq=[1.0], bounds=[(0, cap)] * len(p), method="highs")
    return res.fun


@given(seeds, st.floats(0.1, 1.0))
def test_vertices_match_lp(seed, alpha):
    rng = sampling.stream(seed, 41)
    sp = sampling.random_space(rng, max_n=8)
    t = int(rng.integers(0, sp.T + 1))
    X = sampling.random_variable(sp, rng, allow_inf=False)
    by_vertex = duality.cvar_by_vertices(X, t, alpha).values
    analytic = cond_cvar(X, t, alpha).values
    for atom in sp.atoms(t):
        idx = list(atom)
        p = sp.probs[idx] / sp.probs[idx].sum()
        ref = lp_min(X.values[idx], p, 1.0 / alpha)
        assert by_vertex[idx[0]] == pytest.approx(ref, abs=1e-7)
        assert analytic[idx[0]] == pytest.approx(ref, abs=1e-7)


def test_dual_essinf_examples(S4):
    m = RandomVariable(S4, [1, 3, 2, 5])
    assert duality.dual_essinf(m, 1) == cond_essinf(m, 1)
    assert_values(duality.dual_essinf(S4.constant(4), 0), 4)
    assert_values(duality.dual_essinf(RandomVariable(S4, [-INF, 3, 2, 5]), 0), -INF)


@given(seeds)
def test_dual_essinf_equals_essinf(seed):
    rng = sampling.stream(seed, 43)
    sp = sampling.random_space(rng)
    t = int(rng.integers(0, sp.T + 1))
    m = sampling.random_variable(sp, rng)
    assert duality.dual_essinf(m, t) == cond_essinf(m, t)


def test_robust_weak_check_agrees_with_weak(S4):
    from tests_helpers import late_start
    assert duality.robust_weak_check(measures.cond_expectation_measure(), samples=50).holds
    broken = late_start()
    v = duality.robust_weak_check(broken, [S4.constant(0)], samples=0)
    assert not v.holds and v.witness["t"] == 0
    for seed in range(5):
        phi = measures.random_lm_measure(seed)
        a = duality.robust_weak_check(phi, samples=40, seed=seed).holds
        b = check_weak_tc(phi, "accept", samples=40, seed=seed).holds
        assert a == b, phi.name


def test_index_from_raroc_family(S4):
    V = terminal(S4, [-1, -2, 3, 4])
    idx = duality.index_from_risk_family(measures.raroc_family(0.5), 0, V)
    assert_values(idx, 2 / 3, 1e-7)
    assert_values(duality.index_from_risk_family(const_family(-1.0), 0, V), 0)
    assert_values(duality.index_from_risk_family(const_family(1.0), 0, V), INF)


def test_index_rejects_increasing_family(S4):
    rising = lambda x: LMMeasure("rising", lambda t, V: V.space.constant(x - 1.0), PROCESSES)
    with pytest.raises(NotDecreasingFamily):
        duality.index_from_risk_family(rising, 0, terminal(S4, [1, 2, 3, 4]))


@given(seeds)
def test_index_equals_draroc(seed):
    rng = sampling.stream(seed, 47)
    sp = sampling.random_space(rng, max_n=8)
    V = sampling.random_process(sp, rng, allow_inf=False)
    t = int(rng.integers(0, sp.T + 1))
    idx = duality.index_from_risk_family(measures.raroc_family(0.5), t, V)
    assert_values(idx, measures.draroc(t, V, 0.5), 1e-6)


def test_risk_family_from_dglr(S4):
    V = terminal(S4, [2, -1, 4, -3])
    c = duality.risk_family_from_index(measures.dglr_measure(), 1.0, 0, V)
    assert_values(c, -1 / 3, 1e-7)
    # hand root: E[X - c] = E[(X - c)^-] gives 0.5 - c = 1 + c/2 near c = -1/3
    assert 0.5 - c.values[0] == pytest.approx(1 + c.values[0] / 2, abs=1e-7)


def test_risk_family_non_increasing_in_x(S4):
    V = terminal(S4, [2, -1, 4, -3])
    xs = [0.1, 0.5, 1, 2, 10, 1e3, 1e9]
    vals = [duality.risk_family_from_index(measures.dglr_measure(), x, 0, V).values[0] for x in xs]
    assert all(b <= a + 1e-7 for a, b in zip(vals, vals[1:]))
    assert math.isfinite(vals[-1])


def test_risk_family_bracket(S4):
    V = terminal(S4, [2, -1, 4, -3])
    with pytest.raises(BracketExhausted):
        duality.risk_family_from_index(measures.dglr_measure(), 1.0, 0, V, c_bracket=(5, 10),
                                       strict=True)
    out = duality.risk_family_from_index(measures.dglr_measure(), 1.0, 0, V, c_bracket=(5, 10))
    assert_values(out, -INF)


def test_risk_family_requires_translation_invariance(S4):
    past = LMMeasure("past", lambda t, V: V.space.constant(float(V.rows[0, 0])), PROCESSES)
    V = terminal(S4, [1, 2, 3, 4]).add_at(0, 1.0)
    with pytest.raises(NotTranslationInvariant):
        duality.risk_family_from_index(past, 1.0, 1, V)


def test_round_trip(S4):
    dglr = measures.dglr_measure()
    family = duality.risk_family(dglr)
    for values in ([2, -1, 4, -3], [-1, -2, 3, 4], [1, -5, 2, 2]):
        V = terminal(S4, values)
        back = duality.index_from_risk_family(family, 0, V, x_max=1e3)
        assert_values(back, dglr(0, V), 10 * duality.TOL * 10)


def test_transfer_index_to_family():
    v = duality.converter_consistency_transfer(measures.dglr_measure(), "accept", samples=4,
                                               seed=1, xs=(1.0,))
    assert v.holds


def test_transfer_family_to_index():
    v = duality.converter_consistency_transfer(measures.raroc_family(0.5), "reject", samples=6)
    assert v.holds
    with pytest.raises(HypothesisFailed) as err:
        duality.converter_consistency_transfer(measures.raroc_family(0.5), "accept", samples=30)
    assert err.value.witness is not None
