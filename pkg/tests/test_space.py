import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tclab import sampling
from tclab.errors import (AdaptednessError, BadProbabilities, NonRefiningFiltration,
                          NontrivialRoot, NotMeasurable, TimeOutOfRange)
from tclab.space import AdaptedProcess, RandomVariable, build_space, is_measurable, mult_t

from conftest import assert_values

S4_PARTS = [[[0, 1, 2, 3]], [[0, 1], [2, 3]], [[0], [1], [2], [3]]]


def test_build_s4(S4):
    assert S4.n == 4 and S4.T == 2
    assert S4.n_atoms(1) == 2
    assert S4.atoms(1) == ((0, 1), (2, 3))


def test_bad_probabilities():
    with pytest.raises(BadProbabilities):
        build_space(["a", "b", "c"], [0.5, 0.5, 0.5], [[[0, 1, 2]], [[0], [1], [2]]])
    with pytest.raises(BadProbabilities, match="outcome 1"):
        build_space(["a", "b"], [1.0, 0.0], [[[0, 1]], [[0], [1]]])


def test_non_refining_and_nontrivial_root():
    with pytest.raises(NonRefiningFiltration, match=r"partitions\[2\]"):
        build_space(range(4), [0.25] * 4, [[[0, 1, 2, 3]], [[0], [1], [2], [3]], [[0, 1], [2, 3]]])
    with pytest.raises(NontrivialRoot):
        build_space(range(2), [0.5, 0.5], [[[0], [1]], [[0], [1]]])


def test_canonical_atom_order():
    sp = build_space(range(4), [0.25] * 4, [[[3, 2, 1, 0]], [[3, 2], [1, 0]], [[2], [0], [3], [1]]])
    assert sp.atoms(1) == ((0, 1), (2, 3))
    assert sp.atoms(2) == ((0,), (1,), (2,), (3,))


def test_is_measurable(S4):
    assert is_measurable(RandomVariable(S4, [1, 1, 2, 2]), 1)
    assert not is_measurable(RandomVariable(S4, [1, 3, 2, 2]), 1)
    assert is_measurable(RandomVariable(S4, [1, 3, 2, 2]), 2)
    with pytest.raises(TimeOutOfRange):
        is_measurable(RandomVariable(S4, [1, 1, 1, 1]), 3)


def test_mult_t_zero_is_not_zero(S4):
    V = AdaptedProcess(S4, [[1, 1, 1, 1], [2, 2, 3, 3], [1, 2, 3, 4]])
    out = mult_t(S4.constant(0), V, 1)
    assert out.rows.tolist() == [[1, 1, 1, 1], [0, 0, 0, 0], [0, 0, 0, 0]]
    assert out != S4.zero_process()
    assert mult_t(S4.constant(1), V, 1) == V


def test_mult_t_on_variables_is_plain_product(S4):
    m = RandomVariable(S4, [2, 2, 0, 0])
    X = RandomVariable(S4, [1, -1, math.inf, 3])
    assert_values(mult_t(m, X, 1), [2, -2, 0, 0])


def test_mult_t_requires_measurable_multiplier(S4):
    with pytest.raises(NotMeasurable):
        mult_t(RandomVariable(S4, [1, 2, 3, 4]), S4.zero_process(), 1)


def test_adaptedness_error_names_row(S4):
    with pytest.raises(AdaptednessError, match="row 1"):
        AdaptedProcess(S4, [[0] * 4, [1, 2, 3, 4], [0] * 4])


def test_infinite_values_and_nan(S4):
    X = RandomVariable(S4, ["inf", 1, "-inf", 0])
    assert X.values.tolist() == [math.inf, 1, -math.inf, 0]
    with pytest.raises(ValueError):
        RandomVariable(S4, [float("nan"), 0, 0, 0])


@given(st.integers(0, 2 ** 32))
def test_random_spaces_refine_and_measurability_propagates(seed):
    rng = sampling.stream(seed, 0)
    sp = sampling.random_space(rng)
    for t in range(sp.T):
        for atom in sp.atoms(t + 1):
            assert len(set(sp.labels[t, list(atom)])) == 1
    t = int(rng.integers(0, sp.T + 1))
    x = sampling.random_variable(sp, rng, t)
    assert all(x.is_measurable(s) for s in range(t, sp.T + 1))


@given(st.integers(0, 2 ** 32))
def test_mult_t_monotone_for_nonneg_multiplier(seed):
    rng = sampling.stream(seed, 1)
    sp = sampling.random_space(rng)
    t = int(rng.integers(0, sp.T + 1))
    V = sampling.random_process(sp, rng)
    W = sampling.random_dominating(V, rng)
    m = sp.broadcast(np.abs(rng.uniform(0, 3, sp.n_atoms(t))), t)
    assert (mult_t(m, W, t).rows >= mult_t(m, V, t).rows).all()


def test_json_roundtrip(S4):
    doc = S4.to_json()
    assert build_space(doc["outcomes"], doc["probs"], doc["partitions"]) == S4
