"""Extended-real arithmetic on ``[-inf, +inf]``.

Values are plain Python/numpy floats; ``nan`` is never produced and is
rejected on input. Conventions differ from IEEE 754 in two places:

* ``inf + (-inf) == -inf`` (the sum of opposite infinities is ``-inf``)
* ``0 * (+-inf) == 0``

Finite overflow saturates to the infinity of the matching sign, which is
what IEEE arithmetic already does. Consequently ``neg`` does not distribute
over ``add``: ``neg(add(inf, -inf)) == inf`` while
``add(neg(inf), neg(-inf)) == -inf``.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

ExtReal = float
"""Scalar type alias; any float other than ``nan``."""

POS_INF: ExtReal = math.inf
NEG_INF: ExtReal = -math.inf

ArrayLike = Union[float, int, np.ndarray]


def ext(value) -> ExtReal:
    """Coerce ``value`` (number or ``"inf"``/``"-inf"`` string) to an ExtReal."""
    if isinstance(value, str):
        key = value.strip().lower()
        if key in ("inf", "+inf", "infinity", "+infinity"):
            return POS_INF
        if key in ("-inf", "-infinity"):
            return NEG_INF
        raise ValueError(f"not an extended real: {value!r}")
    if isinstance(value, bool):
        raise TypeError("booleans are not extended reals")
    out = float(value)
    if math.isnan(out):
        raise ValueError("nan is not an extended real")
    return out


def to_json(value: ExtReal):
    """JSON form: a number, or the strings ``"inf"`` / ``"-inf"``."""
    if value == POS_INF:
        return "inf"
    if value == NEG_INF:
        return "-inf"
    v = float(value)
    if v.is_integer() and abs(v) < 2**53:
        return int(v)
    return v


def add(a: ExtReal, b: ExtReal) -> ExtReal:
    if (a == POS_INF and b == NEG_INF) or (a == NEG_INF and b == POS_INF):
        return NEG_INF
    return a + b


def sub(a: ExtReal, b: ExtReal) -> ExtReal:
    """``a + neg(b)`` under the ``inf - inf = -inf`` convention."""
    return add(a, -b)


def mul(a: ExtReal, b: ExtReal) -> ExtReal:
    if a == 0 or b == 0:
        return 0.0
    return a * b


def neg(a: ExtReal) -> ExtReal:
    return -a if a != 0 else 0.0


def div(a: ExtReal, b: ExtReal) -> ExtReal:
    """Quotient for ``b`` finite and nonzero, or ``a`` finite and ``b`` infinite."""
    if b == 0:
        raise ZeroDivisionError("extended-real division by zero")
    if math.isinf(a) and math.isinf(b):
        raise ValueError("inf / inf is undefined")
    return a / b


# -- vectorised forms ------------------------------------------------------

def xadd(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = a + b
    clash = np.isnan(out)
    if clash.any():
        out = np.where(clash, NEG_INF, out)
    return out


def xneg(a: ArrayLike) -> np.ndarray:
    return 0.0 - np.asarray(a, dtype=float)


def xsub(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    return xadd(a, xneg(b))


def xmul(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = a * b
    zero = (a == 0) | (b == 0)
    if zero.any():
        out = np.where(zero, 0.0, out)
    return out


def xpos(a: ArrayLike) -> np.ndarray:
    """Positive part ``max(a, 0)``."""
    return np.maximum(np.asarray(a, dtype=float), 0.0)


def xnegpart(a: ArrayLike) -> np.ndarray:
    """Negative part ``max(-a, 0)``."""
    return np.maximum(xneg(a), 0.0)


def check_no_nan(a: ArrayLike, what: str = "value") -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if np.isnan(arr).any():
        raise ValueError(f"{what} contains nan")
    return arr


def xge(a: ArrayLike, b: ArrayLike, eps: float = 0.0) -> np.ndarray:
    """Pointwise ``a >= b - eps``; exact for infinite ``b``."""
    b = np.asarray(b, dtype=float)
    return np.asarray(a, dtype=float) >= b - eps


def xle(a: ArrayLike, b: ArrayLike, eps: float = 0.0) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    return np.asarray(a, dtype=float) <= b + eps


def xclose(a: ArrayLike, b: ArrayLike, eps: float = 0.0) -> np.ndarray:
    """Equal infinities, or finite values within ``eps``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    same = a == b
    with np.errstate(invalid="ignore"):
        near = np.abs(a - b) <= eps
    return same | (near & np.isfinite(a) & np.isfinite(b))
