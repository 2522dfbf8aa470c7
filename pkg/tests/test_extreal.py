import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tclab import extreal as xr

INF = math.inf
GRID = [-INF, -1.0, 0.0, 1.0, INF]
values = st.one_of(st.floats(allow_nan=False), st.sampled_from([INF, -INF, 0.0]))


def test_opposite_infinities_sum_to_neg_inf():
    assert xr.add(INF, -INF) == -INF
    assert xr.add(-INF, INF) == -INF
    assert xr.add(3, 4) == 7
    assert xr.add(-INF, 5) == -INF


def test_zero_annihilates_infinity():
    assert xr.mul(0, INF) == 0
    assert xr.mul(-INF, 0) == 0
    assert xr.mul(-1, INF) == -INF
    assert xr.mul(2, -3) == -6


def test_neg_does_not_distribute_over_opposite_infinities():
    assert xr.neg(xr.add(INF, -INF)) == INF
    assert xr.add(xr.neg(INF), xr.neg(-INF)) == -INF
    assert xr.neg(0) == 0 and math.copysign(1, xr.neg(0.0)) == 1
    assert xr.neg(7) == -7


@pytest.mark.parametrize("a,b", list(itertools.product(GRID, repeat=2)))
def test_grid_add_commutative_and_no_nan(a, b):
    assert xr.add(a, b) == xr.add(b, a)
    assert not math.isnan(xr.add(a, b)) and not math.isnan(xr.mul(a, b))


def test_grid_add_monotone():
    for a, a2, b, b2 in itertools.product(GRID, repeat=4):
        if a <= a2 and b <= b2:
            assert xr.add(a, b) <= xr.add(a2, b2)


def test_grid_nonneg_mul_monotone_associative():
    nonneg = [0.0, 1.0, 2.5, INF]
    for a, b, c in itertools.product(nonneg, repeat=3):
        assert xr.mul(a, b) == xr.mul(b, a)
        assert xr.mul(xr.mul(a, b), c) == xr.mul(a, xr.mul(b, c))
        if a <= b:
            assert xr.mul(a, c) <= xr.mul(b, c)


@given(values, values)
def test_neg_of_sum_dominates_sum_of_negs(a, b):
    assert xr.neg(xr.add(a, b)) >= xr.add(xr.neg(a), xr.neg(b))


@given(values, values)
def test_neg_involution_and_order_reversal(a, b):
    assert xr.neg(xr.neg(a)) == a
    if a <= b:
        assert xr.neg(a) >= xr.neg(b)


def test_overflow_saturates():
    assert xr.add(1.7e308, 1.7e308) == INF
    assert xr.mul(-1e200, 1e200) == -INF


def test_vectorised_forms_match_scalars():
    pairs = list(itertools.product(GRID, repeat=2))
    a = np.array([p[0] for p in pairs])
    b = np.array([p[1] for p in pairs])
    assert xr.xadd(a, b).tolist() == [xr.add(x, y) for x, y in pairs]
    assert xr.xmul(a, b).tolist() == [xr.mul(x, y) for x, y in pairs]
    assert xr.xneg(a).tolist() == [xr.neg(x) for x in a]


def test_parsing_and_json():
    assert xr.ext("inf") == INF and xr.ext("-inf") == -INF
    assert xr.to_json(INF) == "inf" and xr.to_json(-INF) == "-inf" and xr.to_json(2.0) == 2
    with pytest.raises(ValueError):
        xr.ext(float("nan"))
    with pytest.raises(ValueError):
        xr.ext("abc")


def test_tolerant_comparisons():
    assert xr.xge(1.0 - 5e-10, 1.0, 1e-9)
    assert not xr.xge(1.0 - 5e-9, 1.0, 1e-9)
    assert xr.xclose(INF, INF) and not xr.xclose(INF, 1e300, 1e9)
