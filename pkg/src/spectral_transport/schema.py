"""JSON Schemas (draft 2020-12) for config files and the repro-paper report.

The package does not validate against these at runtime; the config parser
enforces the same rules with line and field diagnostics. They are here for
external tooling and for the test suite.
"""
from __future__ import annotations

_NUMBER = {"type": "number"}
_COMPLEX = {"oneOf": [_NUMBER, {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}]}
_MATRIX = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _COMPLEX}}
_FLOAT_OR_INF = {"oneOf": [_NUMBER, {"enum": ["inf", "-inf"]}]}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "spectral-transport triple config",
    "type": "object",
    "required": ["algebra", "dirac"],
    "additionalProperties": False,
    "properties": {
        "algebra": {
            "type": "object",
            "required": ["kind", "n"],
            "additionalProperties": False,
            "properties": {
                "kind": {"enum": ["commutative", "matrix"]},
                "n": {"type": "integer", "minimum": 1},
                "slots": {"type": "array", "items": {"type": "array", "items": {"type": "integer", "minimum": 1}}},
            },
        },
        "dirac": _MATRIX,
        "states": {
            "type": "object",
            "additionalProperties": {
                "oneOf": [
                    {"type": "array", "items": {"type": "number", "minimum": 0}},
                    {"type": "object", "required": ["density"], "additionalProperties": False,
                     "properties": {"density": _MATRIX}},
                ]
            },
        },
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "max_iter": {"type": "integer", "minimum": 1},
                "polish_tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "spectral-transport repro-paper report",
    "type": "object",
    "required": ["seed", "samples", "passed", "checks"],
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer"},
        "samples": {"type": "integer", "minimum": 8},
        "passed": {"type": "boolean"},
        "checks": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["name", "passed", "details"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string"},
                    "passed": {"type": "boolean"},
                    "details": {"type": ["object", "array"]},
                },
            },
        },
    },
}

DISTANCE_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "spectral-transport distance output",
    "type": "object",
    "required": ["value", "witness", "iterations", "certified_gap"],
    "properties": {
        "value": _FLOAT_OR_INF,
        "witness": {"type": "array"},
        "iterations": {"type": "integer", "minimum": 0},
        "certified_gap": {"type": "number"},
    },
}
