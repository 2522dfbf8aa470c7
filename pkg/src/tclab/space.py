"""Finite filtered probability spaces, random variables and adapted processes."""

from __future__ import annotations

import itertools
import math
from typing import Iterable, Iterator, Sequence, Union

import numpy as np

from . import extreal as xr
from .errors import (
    AdaptednessError,
    BadProbabilities,
    NonRefiningFiltration,
    NontrivialRoot,
    NotMeasurable,
    SpaceError,
    SpaceMismatch,
    TimeOutOfRange,
)

PROB_TOL = 1e-9


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


class FilteredSpace:
    """Outcomes, strictly positive weights and a refining chain of partitions.

    ``partitions[t]`` is a list of atoms (lists of 0-based outcome indices).
    Atoms are stored in canonical order, sorted by least outcome index, and
    ``labels[t, w]`` is the position of outcome ``w``'s atom at time ``t``.
    """

    def __init__(self, outcomes: Sequence, probs: Sequence[float],
                 partitions: Sequence[Sequence[Sequence[int]]]):
        self.outcomes = tuple(outcomes)
        n = len(self.outcomes)
        if n == 0:
            raise SpaceError("space needs at least one outcome")
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (n,):
            raise BadProbabilities(f"expected {n} probabilities, got {probs.size}")
        for i, p in enumerate(probs):
            if not (p > 0) or math.isinf(p):
                raise BadProbabilities(f"probability of outcome {i} is {p}; must be > 0")
        total = math.fsum(probs)
        if abs(total - 1.0) > PROB_TOL:
            raise BadProbabilities(f"probabilities sum to {total}, not 1")
        self.probs = _frozen(probs.copy())

        if len(partitions) < 2:
            raise SpaceError("need partitions for times 0..T with T >= 1")
        canon = []
        labels = np.empty((len(partitions), n), dtype=np.int64)
        for t, part in enumerate(partitions):
            atoms = sorted((tuple(sorted(int(i) for i in atom)) for atom in part),
                           key=lambda a: a[0] if a else -1)
            seen = [a for atom in atoms for a in atom]
            if any(len(a) == 0 for a in atoms) or sorted(seen) != list(range(n)):
                raise SpaceError(f"partitions[{t}] is not a partition of outcomes 0..{n - 1}")
            for j, atom in enumerate(atoms):
                labels[t, list(atom)] = j
            canon.append(tuple(atoms))
        if len(canon[0]) != 1:
            raise NontrivialRoot(f"partitions[0] has {len(canon[0])} atoms; F_0 must be trivial")
        for t in range(len(canon) - 1):
            for atom in canon[t + 1]:
                if len(set(labels[t, list(atom)])) != 1:
                    raise NonRefiningFiltration(
                        f"partitions[{t + 1}] does not refine partitions[{t}] "
                        f"(atom {list(atom)} straddles time-{t} atoms)")
        self.partitions = tuple(canon)
        self.labels = _frozen(labels)
        self.T = len(canon) - 1

    # -- structure -------------------------------------------------------
    @property
    def n(self) -> int:
        return len(self.outcomes)

    def check_time(self, t: int) -> int:
        if not isinstance(t, (int, np.integer)) or not 0 <= t <= self.T:
            raise TimeOutOfRange(f"time {t} outside 0..{self.T}")
        return int(t)

    def atoms(self, t: int):
        return self.partitions[self.check_time(t)]

    def n_atoms(self, t: int) -> int:
        return len(self.atoms(t))

    def atom_masks(self, t: int) -> list:
        lab = self.labels[self.check_time(t)]
        return [lab == j for j in range(self.n_atoms(t))]

    def atom_unions(self, t: int) -> Iterator[np.ndarray]:
        """All nonempty F_t-events as boolean masks (2**k - 1 of them)."""
        masks = self.atom_masks(t)
        for r in range(1, len(masks) + 1):
            for combo in itertools.combinations(masks, r):
                yield np.logical_or.reduce(combo)

    def atom_probs(self, t: int) -> np.ndarray:
        lab = self.labels[self.check_time(t)]
        out = np.zeros(self.n_atoms(t))
        np.add.at(out, lab, self.probs)
        return out

    def is_measurable_values(self, values, t: int) -> bool:
        lab = self.labels[self.check_time(t)]
        values = np.asarray(values, dtype=float)
        for j in range(self.n_atoms(t)):
            block = values[lab == j]
            if not np.all(block == block[0]):
                return False
        return True

    # -- constructors ------------------------------------------------------
    def variable(self, values) -> "RandomVariable":
        return RandomVariable(self, values)

    def constant(self, c) -> "RandomVariable":
        return RandomVariable(self, np.full(self.n, xr.ext(c)))

    def indicator(self, mask) -> "RandomVariable":
        return RandomVariable(self, np.asarray(mask, dtype=bool).astype(float))

    def zero_process(self) -> "AdaptedProcess":
        return AdaptedProcess(self, np.zeros((self.T + 1, self.n)))

    def process(self, rows, name: str = "process") -> "AdaptedProcess":
        return AdaptedProcess(self, rows, name=name)

    def broadcast(self, per_atom, t: int) -> "RandomVariable":
        """Lift one value per atom of F_t to a random variable."""
        per_atom = np.asarray(per_atom, dtype=float)
        return RandomVariable(self, per_atom[self.labels[self.check_time(t)]])

    def to_json(self) -> dict:
        return {"outcomes": list(self.outcomes), "probs": self.probs.tolist(),
                "partitions": [[list(a) for a in part] for part in self.partitions]}

    def _key(self):
        return (self.outcomes, tuple(self.probs), self.partitions)

    def __eq__(self, other):
        return self is other or (isinstance(other, FilteredSpace) and self._key() == other._key())

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        sizes = [len(p) for p in self.partitions]
        return f"FilteredSpace(n={self.n}, T={self.T}, atoms={sizes})"


def build_space(outcomes, probs, partitions) -> FilteredSpace:
    return FilteredSpace(outcomes, probs, partitions)


def s4() -> FilteredSpace:
    """Four equally likely outcomes split in two at t=1, fully revealed at t=2."""
    return FilteredSpace(
        ["w1", "w2", "w3", "w4"],
        [0.25] * 4,
        [[[0, 1, 2, 3]], [[0, 1], [2, 3]], [[0], [1], [2], [3]]],
    )


Scalar = Union[int, float]


class RandomVariable:
    """Extended-real valued map on the outcomes of a space."""

    __slots__ = ("space", "values")

    def __init__(self, space: FilteredSpace, values):
        if isinstance(values, RandomVariable):
            values = values.values
        arr = np.array([xr.ext(v) for v in values] if _needs_parse(values) else values,
                       dtype=float)
        if arr.shape != (space.n,):
            raise SpaceMismatch(f"expected {space.n} values, got shape {arr.shape}")
        xr.check_no_nan(arr, "random variable")
        self.space = space
        self.values = _frozen(arr)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, RandomVariable):
            if other.space is not self.space and other.space != self.space:
                raise SpaceMismatch("random variables live on different spaces")
            return other.values
        return np.full(self.space.n, xr.ext(other))

    def __add__(self, other):
        return RandomVariable(self.space, xr.xadd(self.values, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return RandomVariable(self.space, xr.xsub(self.values, self._coerce(other)))

    def __rsub__(self, other):
        return RandomVariable(self.space, xr.xsub(self._coerce(other), self.values))

    def __mul__(self, other):
        return RandomVariable(self.space, xr.xmul(self.values, self._coerce(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return RandomVariable(self.space, xr.xneg(self.values))

    def minimum(self, other) -> "RandomVariable":
        return RandomVariable(self.space, np.minimum(self.values, self._coerce(other)))

    def maximum(self, other) -> "RandomVariable":
        return RandomVariable(self.space, np.maximum(self.values, self._coerce(other)))

    def map(self, fn) -> "RandomVariable":
        return RandomVariable(self.space, [fn(float(v)) for v in self.values])

    def is_measurable(self, t: int) -> bool:
        return self.space.is_measurable_values(self.values, t)

    def ge(self, other, eps: float = 0.0) -> bool:
        return bool(np.all(xr.xge(self.values, self._coerce(other), eps)))

    def le(self, other, eps: float = 0.0) -> bool:
        return bool(np.all(xr.xle(self.values, self._coerce(other), eps)))

    def close(self, other, eps: float = 0.0) -> bool:
        return bool(np.all(xr.xclose(self.values, self._coerce(other), eps)))

    def __eq__(self, other):
        if not isinstance(other, RandomVariable):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.values, other.values)

    __hash__ = None

    def __len__(self):
        return self.space.n

    def __iter__(self):
        return iter(self.values.tolist())

    def __getitem__(self, i):
        return float(self.values[i])

    def tolist(self) -> list:
        return [float(v) for v in self.values]

    def to_json(self) -> list:
        return [xr.to_json(v) for v in self.values]

    def __repr__(self):
        return f"RandomVariable({self.tolist()})"


def _needs_parse(values) -> bool:
    if isinstance(values, np.ndarray):
        return values.dtype.kind in "OUS"
    return any(isinstance(v, str) for v in values)


class AdaptedProcess:
    """Rows ``V_0..V_T`` with ``V_t`` measurable with respect to ``F_t``."""

    __slots__ = ("space", "rows")

    def __init__(self, space: FilteredSpace, rows, name: str = "process"):
        rows = [RandomVariable(space, r).values for r in rows]
        if len(rows) != space.T + 1:
            raise SpaceMismatch(f"{name}: expected {space.T + 1} rows, got {len(rows)}")
        arr = np.vstack(rows)
        for t in range(space.T + 1):
            if not space.is_measurable_values(arr[t], t):
                raise AdaptednessError(f"{name}: row {t} is not F_{t}-measurable")
        self.space = space
        self.rows = _frozen(arr)

    @classmethod
    def terminal(cls, X: RandomVariable) -> "AdaptedProcess":
        """The process paying ``X`` at ``T`` and nothing before."""
        sp = X.space
        rows = np.zeros((sp.T + 1, sp.n))
        rows[sp.T] = X.values
        return cls(sp, rows)

    def row(self, t: int) -> RandomVariable:
        return RandomVariable(self.space, self.rows[self.space.check_time(t)])

    def tail_sum(self, t: int) -> RandomVariable:
        """``V_t + ... + V_T`` accumulated from the right."""
        t = self.space.check_time(t)
        acc = self.rows[self.space.T]
        for i in range(self.space.T - 1, t - 1, -1):
            acc = xr.xadd(self.rows[i], acc)
        return RandomVariable(self.space, acc)

    def add_at(self, t: int, c) -> "AdaptedProcess":
        """``V + c 1_{t}``: add ``c`` (F_t-measurable) to row ``t``."""
        rows = self.rows.copy()
        c = c.values if isinstance(c, RandomVariable) else np.full(self.space.n, xr.ext(c))
        rows[self.space.check_time(t)] = xr.xadd(rows[t], c)
        return AdaptedProcess(self.space, rows)

    def with_rows(self, rows) -> "AdaptedProcess":
        return AdaptedProcess(self.space, rows)

    def __eq__(self, other):
        if not isinstance(other, AdaptedProcess):
            return NotImplemented
        return self.space == other.space and np.array_equal(self.rows, other.rows)

    __hash__ = None

    def tolist(self):
        return [[float(v) for v in r] for r in self.rows]

    def to_json(self):
        return [[xr.to_json(v) for v in r] for r in self.rows]

    def __repr__(self):
        return f"AdaptedProcess({self.tolist()})"


Payoff = Union[RandomVariable, AdaptedProcess]


def is_measurable(x: RandomVariable, t: int) -> bool:
    x.space.check_time(t)
    return x.is_measurable(t)


def mult_t(m: RandomVariable, V: Payoff, t: int) -> Payoff:
    """``m ._t V``: scale rows ``t..T`` of ``V`` by ``m``; plain product for variables."""
    sp = m.space
    sp.check_time(t)
    if not m.is_measurable(t):
        raise NotMeasurable(f"multiplier is not F_{t}-measurable")
    if isinstance(V, RandomVariable):
        return m * V
    rows = V.rows.copy()
    rows[t:] = xr.xmul(rows[t:], m.values[None, :])
    return AdaptedProcess(sp, rows)


def restrict(mask, V: Payoff, t: int) -> Payoff:
    """``1_A ._t V`` for an F_t-event given as a boolean mask."""
    return mult_t(V.space.indicator(mask), V, t)


def paste(mask, X: Payoff, Y: Payoff, t: int) -> Payoff:
    """``1_A X + 1_{A^c} Y`` on rows ``t..T``; rows before ``t`` come from ``X``."""
    mask = np.asarray(mask, dtype=bool)
    if isinstance(X, RandomVariable):
        return RandomVariable(X.space, np.where(mask, X.values, Y.values))
    rows = X.rows.copy()
    rows[t:] = np.where(mask[None, :], X.rows[t:], Y.rows[t:])
    return AdaptedProcess(X.space, rows)


def as_payoffs(space: FilteredSpace, items: Iterable) -> list:
    return [x if isinstance(x, (RandomVariable, AdaptedProcess)) else space.variable(x)
            for x in items]
