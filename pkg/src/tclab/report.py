"""Verdicts and their JSON form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from . import extreal as xr
from .space import AdaptedProcess, RandomVariable

DEFAULT_EPS = 1e-9


def jsonable(obj: Any) -> Any:
    """Recursively convert library objects to JSON-compatible values."""
    if isinstance(obj, (RandomVariable, AdaptedProcess)):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return xr.to_json(float(obj))
    if hasattr(obj, "to_json"):
        return obj.to_json()
    return obj


@dataclass
class Verdict:
    """Outcome of a property check over a set of instances.

    ``witness`` is present whenever ``holds`` is false and records enough to
    replay the violation (input, times, both sides, atom).
    """

    holds: bool
    checked: int = 0
    witness: Optional[dict] = None
    seed: Optional[int] = None
    eps: float = DEFAULT_EPS
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"holds": self.holds, "checked": self.checked, "eps": self.eps,
               "seed": self.seed, "witness": jsonable(self.witness)}
        if self.details:
            out["details"] = jsonable(self.details)
        return out

    def __bool__(self):
        return self.holds


@dataclass
class PropertyReport:
    """Named verdicts, e.g. an LM-axiom report or a rule classification."""

    subject: str
    verdicts: dict
    declared: dict = field(default_factory=dict)

    @property
    def contradictions(self) -> dict:
        """Declared flags that a counterexample refuted."""
        return {k: self.verdicts[k] for k, flag in self.declared.items()
                if flag and k in self.verdicts and not self.verdicts[k].holds}

    def __getitem__(self, key) -> Verdict:
        return self.verdicts[key]

    def to_json(self) -> dict:
        return {"subject": self.subject,
                "verdicts": {k: v.to_json() for k, v in self.verdicts.items()},
                "declared": dict(self.declared),
                "contradictions": sorted(self.contradictions)}
