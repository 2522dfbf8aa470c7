"""Scenario-tree JSON documents."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema

from .errors import SchemaError
from .space import AdaptedProcess, FilteredSpace, RandomVariable

_VALUE = {"anyOf": [{"type": "number"}, {"enum": ["inf", "-inf"]}]}
_ROW = {"type": "array", "items": _VALUE}

SCHEMA = {
    "type": "object",
    "required": ["outcomes", "probs", "partitions"],
    "properties": {
        "outcomes": {"type": "array", "minItems": 1},
        "probs": {"type": "array", "items": {"type": "number"}},
        "partitions": {
            "type": "array", "minItems": 2,
            "items": {"type": "array",
                      "items": {"type": "array", "items": {"type": "integer", "minimum": 0}}},
        },
        "variables": {"type": "object", "additionalProperties": _ROW},
        "processes": {"type": "object", "additionalProperties": {"type": "array", "items": _ROW}},
    },
}


@dataclass
class Tree:
    space: FilteredSpace
    variables: dict = field(default_factory=dict)
    processes: dict = field(default_factory=dict)


def parse_tree(doc: dict) -> Tree:
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{path}: {exc.message}") from None
    space = FilteredSpace(doc["outcomes"], doc["probs"], doc["partitions"])
    variables = {}
    for name, values in doc.get("variables", {}).items():
        try:
            variables[name] = RandomVariable(space, values)
        except ValueError as exc:
            raise SchemaError(f"variables/{name}: {exc}") from None
    processes = {name: AdaptedProcess(space, rows, name=f"process {name!r}")
                 for name, rows in doc.get("processes", {}).items()}
    return Tree(space, variables, processes)


def load_tree(path) -> Tree:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return parse_tree(doc)


S4_DOCUMENT = {
    "outcomes": ["w1", "w2", "w3", "w4"],
    "probs": [0.25, 0.25, 0.25, 0.25],
    "partitions": [[[0, 1, 2, 3]], [[0, 1], [2, 3]], [[0], [1], [2], [3]]],
    "variables": {"m1": [1, 3, 2, 5], "X1": [4, 2, -2, 6], "R1": [-1, -2, 3, 4]},
    "processes": {
        "V1": [[0, 0, 0, 0], [0, 0, 0, 0], [2, -1, 4, -3]],
        "V2": [[0, 0, 0, 0], [1, 1, -1, -1], [1, 2, 3, 4]],
    },
}


def s4_tree() -> Tree:
    """The four-outcome, two-period fixture used by the CLI when no tree is given."""
    return parse_tree(S4_DOCUMENT)
