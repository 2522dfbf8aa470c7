import math

import numpy as np
import pytest
from hypothesis import settings

from tclab.space import AdaptedProcess, RandomVariable, s4

settings.register_profile("tclab", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("tclab")

INF = math.inf


@pytest.fixture
def S4():
    return s4()


def rv(space, values):
    return RandomVariable(space, values)


def terminal(space, values):
    return AdaptedProcess.terminal(RandomVariable(space, values))


def assert_values(actual, expected, tol=1e-12):
    a = np.asarray(actual.values if hasattr(actual, "values") else actual, dtype=float)
    e = np.broadcast_to(np.asarray(expected, dtype=float), a.shape)
    same_inf = (a == e)
    with np.errstate(invalid="ignore"):
        near = np.isfinite(a) & np.isfinite(e) & (np.abs(a - e) <= tol)
    assert (same_inf | near).all(), f"{a.tolist()} != {e.tolist()}"
