"""Strictly increasing maps on the extended reals, with their inverses."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonInvertibleTransform

_PROBE = np.array([-math.inf, -1e6, -10.0, -1.0, -0.5, 0.0, 0.25, 1.0, 3.0, 10.0, 1e6, math.inf])


@dataclass(frozen=True)
class MonotoneMap:
    """``g`` and a monotone inverse, both vectorised over float arrays.

    The inverse is defined on all of ``[-inf, inf]``; for bounded maps it
    saturates to ``+-inf`` outside the range of ``g``.
    """

    name: str
    forward: Callable[[np.ndarray], np.ndarray]
    inverse: Callable[[np.ndarray], np.ndarray]
    onto: bool = True  # False when the range is a bounded interval

    def __call__(self, x):
        return self.forward(np.asarray(x, dtype=float))

    def inv(self, y):
        return self.inverse(np.asarray(y, dtype=float))


def checked(name: str, forward, inverse) -> MonotoneMap:
    """Build a map after probing strict increase and ``inv(g(x)) == x``."""
    g = MonotoneMap(name, forward, inverse)
    with np.errstate(all="ignore"):
        y = g(_PROBE)
        back = g.inv(y)
    if np.isnan(y).any() or np.any(np.diff(y) <= 0):
        raise NonInvertibleTransform(f"{name} is not strictly increasing on the probe grid")
    finite = np.isfinite(_PROBE)
    if not np.allclose(back[finite], _PROBE[finite], rtol=1e-9, atol=1e-9):
        raise NonInvertibleTransform(f"{name}: inverse does not undo the map")
    return g


def identity() -> MonotoneMap:
    return MonotoneMap("identity", lambda x: x, lambda y: y)


def scale(c: float) -> MonotoneMap:
    if not c > 0:
        raise NonInvertibleTransform(f"scale factor {c} must be positive")
    return MonotoneMap(f"scale:{c:g}", lambda x: x * c, lambda y: y / c)


def cube() -> MonotoneMap:
    return MonotoneMap("cube", lambda x: x ** 3, np.cbrt)


def _tan_saturating(y):
    half = math.pi / 2
    with np.errstate(all="ignore"):
        out = np.tan(y)
    out = np.where(y >= half, math.inf, out)
    return np.where(y <= -half, -math.inf, out)


def arctan() -> MonotoneMap:
    """Bounded bijection ``[-inf, inf] -> [-pi/2, pi/2]``."""
    return MonotoneMap("arctan", np.arctan, _tan_saturating, onto=False)


def by_name(name: str) -> MonotoneMap:
    if name == "identity":
        return identity()
    if name == "cube":
        return cube()
    if name == "arctan":
        return arctan()
    if name.startswith("scale:"):
        return scale(float(name.split(":", 1)[1]))
    raise NonInvertibleTransform(f"unknown transform {name!r}")
