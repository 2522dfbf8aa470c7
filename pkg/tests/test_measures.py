import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tclab import measures, sampling
from tclab import extreal as xr
from tclab.condops import cond_expect
from tclab.duality import cvar_by_vertices, raroc_family_by_vertices
from tclab.errors import BadAlpha, BadX, KindMismatch
from tclab.measures import LMMeasure, PROCESSES, VARIABLES
from tclab.space import AdaptedProcess, RandomVariable, mult_t
from tclab.transforms import arctan, cube, identity

from conftest import assert_values, terminal

INF = math.inf
seeds = st.integers(0, 2 ** 40)


def finite_process(seed):
    rng = sampling.stream(seed, 11)
    sp = sampling.random_space(rng, max_n=8, max_T=3)
    return rng, sp, sampling.random_process(sp, rng, allow_inf=False)


def test_cexp_examples(S4):
    phi = measures.cond_expectation_measure()
    assert_values(phi(1, RandomVariable(S4, [4, 2, -2, 6])), [3, 3, 2, 2])
    assert_values(phi(0, RandomVariable(S4, [1, 3, 2, 5])), 2.75)
    X = RandomVariable(S4, [4, 2, -2, 6])
    c = RandomVariable(S4, [1, 1, -3, -3])
    assert_values(phi(1, X + c), phi(1, X) + c)


def test_dglr_examples(S4):
    assert_values(measures.dglr(0, terminal(S4, [2, -1, 4, -3])), 0.5)
    assert_values(measures.dglr(0, terminal(S4, [-1, -1, 1, 0])), 0)
    assert_values(measures.dglr(0, terminal(S4, [1, 2, 3, 4])), INF)


def test_cvar_examples(S4):
    V = terminal(S4, [1, 2, 3, 4])
    assert_values(measures.cvar_rho(0, V, 0.5), 1.5)
    assert_values(measures.cvar_rho(0, terminal(S4, [3] * 4), 0.3), 3)
    assert_values(measures.cvar_rho(1, V, 1.0), cond_expect(V.tail_sum(1), 1))
    with pytest.raises(BadAlpha):
        measures.cvar_rho(0, V, 0.0)


def test_draroc_examples(S4):
    assert_values(measures.draroc(0, terminal(S4, [-1, -2, 3, 4]), 0.5), 2 / 3, 1e-12)
    assert_values(measures.draroc(0, terminal(S4, [1, 2, 3, 4]), 0.5), INF)
    assert_values(measures.draroc(0, terminal(S4, [-1, -1, 1, 0]), 0.5), 0)
    with pytest.raises(BadAlpha):
        measures.draroc(0, terminal(S4, [1, 2, 3, 4]), 1.0)


def test_raroc_family_examples(S4):
    V = terminal(S4, [-1, -2, 3, 4])
    assert_values(measures.raroc_risk_family(0, 0, V, 0.5), 1)
    assert_values(measures.raroc_risk_family(1, 0, V, 0.5), -0.25)
    assert_values(raroc_family_by_vertices(1, 0, V, 0.5), -0.25, 1e-12)
    assert_values(measures.raroc_risk_family(1e6, 0, V, 0.5), -1.5, 1e-5)
    with pytest.raises(BadX):
        measures.raroc_risk_family(-1, 0, V, 0.5)


def test_kind_mismatch(S4):
    with pytest.raises(KindMismatch):
        measures.dglr_measure()(0, RandomVariable(S4, [1, 2, 3, 4]))
    with pytest.raises(KindMismatch):
        measures.cond_expectation_measure()(0, S4.zero_process())


def test_on_variables(S4):
    phi = measures.dglr_measure().on_variables()
    assert phi.kind == VARIABLES
    assert_values(phi(0, RandomVariable(S4, [2, -1, 4, -3])), 0.5)


@pytest.mark.parametrize("phi", [measures.dglr_measure(), measures.draroc_measure(0.5),
                                 measures.raroc_family(0.5)(2.0),
                                 measures.cond_expectation_measure()],
                         ids=lambda m: m.name)
def test_axioms_hold(phi):
    rng = sampling.stream(5, 0)
    for i in range(4):
        sp = sampling.random_space(sampling.stream(5, i), max_n=8)
        report = measures.check_lm_axioms(phi, sp, 15, seed=i)
        assert report["locality"].holds and report["monotonicity"].holds


def test_sign_flip_breaks_monotonicity(S4):
    broken = LMMeasure("neg-cexp", lambda t, X: -cond_expect(X, t))
    report = measures.check_lm_axioms(broken, S4, 20, seed=1)
    assert not report["monotonicity"].holds
    w = report["monotonicity"].witness
    assert (w["Y"].values >= w["X"].values).all() and w["phi_X"] > w["phi_Y"]


def test_monotone_transform_measure(S4):
    base = measures.dglr_measure()
    assert measures.monotone_transform_measure(identity(), base)(0, terminal(S4, [2, -1, 4, -3])) \
        == base(0, terminal(S4, [2, -1, 4, -3]))
    cubed = measures.monotone_transform_measure(cube(), base)
    report = measures.check_lm_axioms(cubed, S4, 20)
    assert report["locality"].holds and report["monotonicity"].holds
    bounded = measures.monotone_transform_measure(arctan(), base)
    assert_values(bounded(0, terminal(S4, [1, 2, 3, 4])), math.pi / 2)


@given(seeds)
def test_ratios_scale_invariant_and_nonnegative(seed):
    rng, sp, V = finite_process(seed)
    t = int(rng.integers(0, sp.T + 1))
    lam = sp.broadcast(rng.uniform(0.1, 5.0, sp.n_atoms(t)), t)
    for f in (measures.dglr, lambda t, V: measures.draroc(t, V, 0.5)):
        base = f(t, V).values
        assert (base >= 0).all()
        scaled = f(t, mult_t(lam, V, t)).values
        assert xr.xclose(scaled, base, 1e-9 * (1 + np.abs(np.where(np.isinf(base), 0, base)))).all()


@given(seeds, st.floats(0.05, 0.95))
def test_raroc_family_non_increasing_in_x(seed, alpha):
    rng, sp, V = finite_process(seed)
    t = int(rng.integers(0, sp.T + 1))
    xs = [0.0, 0.1, 0.5, 1.0, 3.0, 10.0, 1e3]
    vals = [measures.raroc_risk_family(x, t, V, alpha).values for x in xs]
    for a, b in zip(vals, vals[1:]):
        assert (b <= a + 1e-12).all()


@given(seeds, st.floats(0.05, 0.95), st.floats(0.0, 0.05))
def test_cvar_properties(seed, alpha, bump):
    rng, sp, V = finite_process(seed)
    t = int(rng.integers(0, sp.T + 1))
    W = sampling.random_dominating(V, rng, allow_inf=False)
    rho = measures.cvar_rho(t, V, alpha).values
    assert (measures.cvar_rho(t, W, alpha).values >= rho - 1e-9).all()
    assert (measures.cvar_rho(t, V, min(1.0, alpha + bump)).values >= rho - 1e-9).all()
    c = sp.broadcast(rng.uniform(-5, 5, sp.n_atoms(t)), t)
    assert_values(measures.cvar_rho(t, V.add_at(t, c), alpha), rho + c.values, 1e-9)
    assert_values(measures.cvar_rho(t, V, alpha), cvar_by_vertices(V.tail_sum(t), t, alpha), 1e-9)


def test_random_measures_are_lm():
    sp = sampling.random_space(sampling.stream(3, 3), max_n=7)
    for seed in range(6):
        for kind in (VARIABLES, PROCESSES):
            phi = measures.random_lm_measure(seed, kind)
            report = measures.check_lm_axioms(phi, sp, 5, seed=seed)
            assert report["locality"].holds and report["monotonicity"].holds, phi.name


def test_random_monetary_measure_is_cash_additive():
    rng = sampling.stream(2, 2)
    sp = sampling.random_space(rng)
    phi = measures.random_lm_measure(4, VARIABLES, monetary=True)
    X = sampling.random_variable(sp, rng, None, allow_inf=False)
    for t in range(sp.T + 1):
        c = sp.broadcast(rng.uniform(-3, 3, sp.n_atoms(t)), t)
        assert_values(phi(t, X + c), phi(t, X) + c, 1e-9)
        assert_values(phi(t, sp.constant(0)), 0, 1e-12)
