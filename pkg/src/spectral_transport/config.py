"""JSON configuration files describing a triple, named states and solver options.

Example::

    {
      "algebra": {"kind": "commutative", "n": 3, "slots": [[1], [2], [3]]},
      "dirac": [[[0, 0], [0, 0], [1, 0]],
                [[0, 0], [0, 0], [2, 0]],
                [[1, 0], [2, 0], [0, 0]]],
      "states": {"phi": [0.3, 0.3, 0.4]},
      "solver": {"tol": 1e-6}
    }

Complex numbers are ``[re, im]`` pairs. Slots are 1-based Hilbert-space
indices. For ``"kind": "matrix"`` states are ``{"density": <matrix>}``.
Commutative algebras get the pure states ``d1`` .. ``dn`` for free.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .linalg import DomainError
from .metric import SolverOptions
from .triple import (
    Commutative,
    DensityState,
    FiniteSpectralTriple,
    FullMatrix,
    ProbabilityState,
    State,
    pure_state,
)


class ConfigError(ValueError):
    """A config file could not be parsed; ``where`` names the line or field."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


@dataclass
class TripleConfig:
    triple: FiniteSpectralTriple
    states: dict[str, State] = field(default_factory=dict)
    solver: SolverOptions = field(default_factory=SolverOptions)

    def state(self, spec: str) -> State:
        """Look up a named state or parse inline comma-separated weights."""
        if spec in self.states:
            return self.states[spec]
        if self.triple.is_commutative and spec.startswith("d") and spec[1:].isdigit():
            return pure_state(self.triple, int(spec[1:]) - 1)
        try:
            weights = [float(x) for x in spec.split(",")]
        except ValueError:
            raise ConfigError(f"state {spec!r}", "unknown state name") from None
        if not self.triple.is_commutative:
            raise ConfigError(f"state {spec!r}", "inline weights need a commutative algebra")
        if len(weights) != self.triple.algebra.n:
            raise ConfigError(f"state {spec!r}", f"expected {self.triple.algebra.n} weights")
        try:
            return ProbabilityState(weights)
        except DomainError as err:
            raise ConfigError(f"state {spec!r}", str(err)) from None


def _complex_matrix(raw: Any, where: str) -> np.ndarray:
    if not isinstance(raw, list) or not raw or not all(isinstance(r, list) for r in raw):
        raise ConfigError(where, "expected a nonempty list of rows")
    rows = []
    for i, row in enumerate(raw):
        if len(row) != len(raw[0]):
            raise ConfigError(f"{where}[{i}]", f"row has {len(row)} entries, expected {len(raw[0])}")
        vals = []
        for j, entry in enumerate(row):
            if isinstance(entry, (int, float)) and not isinstance(entry, bool):
                vals.append(complex(entry))
            elif (isinstance(entry, list) and len(entry) == 2
                  and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)):
                vals.append(complex(entry[0], entry[1]))
            else:
                raise ConfigError(f"{where}[{i}][{j}]", "expected a number or an [re, im] pair")
        rows.append(vals)
    return np.array(rows, dtype=complex)


def _algebra(raw: Any):
    if not isinstance(raw, dict):
        raise ConfigError("algebra", "expected an object")
    kind = raw.get("kind")
    n = raw.get("n")
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigError("algebra.n", "expected a positive integer")
    if kind == "matrix":
        return FullMatrix(n)
    if kind != "commutative":
        raise ConfigError("algebra.kind", f"expected 'commutative' or 'matrix', got {kind!r}")
    slots = raw.get("slots")
    if slots is None:
        return Commutative.unit_multiplicity(n)
    if not isinstance(slots, list) or len(slots) != n:
        raise ConfigError("algebra.slots", f"expected {n} slot lists")
    parsed = []
    for i, s in enumerate(slots):
        if not isinstance(s, list) or not all(isinstance(k, int) and not isinstance(k, bool) for k in s):
            raise ConfigError(f"algebra.slots[{i}]", "expected a list of 1-based integers")
        parsed.append(tuple(k - 1 for k in s))
    try:
        return Commutative(n, tuple(parsed))
    except DomainError as err:
        raise ConfigError("algebra.slots", str(err)) from None


def _solver(raw: Any) -> SolverOptions:
    if raw is None:
        return SolverOptions()
    if not isinstance(raw, dict):
        raise ConfigError("solver", "expected an object")
    known = {"tol": float, "max_iter": int, "polish_tol": float}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"solver.{key}", "unknown option")
        if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
            raise ConfigError(f"solver.{key}", "expected a positive number")
        kwargs[key] = known[key](value)
    return SolverOptions(**kwargs)


def parse_config(data: Any) -> TripleConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    for key in data:
        if key not in ("algebra", "dirac", "states", "solver"):
            raise ConfigError(key, "unknown top-level field")
    if "algebra" not in data or "dirac" not in data:
        raise ConfigError("<root>", "fields 'algebra' and 'dirac' are required")
    algebra = _algebra(data["algebra"])
    dirac = _complex_matrix(data["dirac"], "dirac")
    try:
        triple = FiniteSpectralTriple(algebra, dirac)
    except DomainError as err:
        raise ConfigError("dirac", str(err)) from None
    states: dict[str, State] = {}
    raw_states = data.get("states", {})
    if not isinstance(raw_states, dict):
        raise ConfigError("states", "expected an object of named states")
    for name, raw in raw_states.items():
        where = f"states.{name}"
        try:
            if isinstance(raw, dict) and "density" in raw:
                if triple.is_commutative:
                    raise ConfigError(where, "density matrices need a matrix algebra")
                states[name] = DensityState(_complex_matrix(raw["density"], f"{where}.density"))
            elif isinstance(raw, list):
                if not triple.is_commutative:
                    raise ConfigError(where, "weight vectors need a commutative algebra")
                if len(raw) != algebra.n or not all(isinstance(x, (int, float)) for x in raw):
                    raise ConfigError(where, f"expected {algebra.n} numeric weights")
                states[name] = ProbabilityState(raw)
            else:
                raise ConfigError(where, "expected a weight list or {\"density\": matrix}")
        except DomainError as err:
            raise ConfigError(where, str(err)) from None
    return TripleConfig(triple, states, _solver(data.get("solver")))


def load_config(path) -> TripleConfig:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"line {err.lineno}, column {err.colno}", err.msg) from None
    return parse_config(data)


def _pairs(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def config_to_dict(cfg: TripleConfig) -> dict:
    alg = cfg.triple.algebra
    if isinstance(alg, Commutative):
        algebra = {"kind": "commutative", "n": alg.n, "slots": [[k + 1 for k in s] for s in alg.slots]}
    else:
        algebra = {"kind": "matrix", "n": alg.n}
    states = {}
    for name, s in cfg.states.items():
        if isinstance(s, ProbabilityState):
            states[name] = [float(x) for x in s.weights]
        else:
            states[name] = {"density": _pairs(s.rho)}
    defaults = SolverOptions()
    solver = {f.name: getattr(cfg.solver, f.name) for f in fields(SolverOptions)
              if f.name in ("tol", "max_iter", "polish_tol") and getattr(cfg.solver, f.name) != getattr(defaults, f.name)}
    out = {"algebra": algebra, "dirac": _pairs(cfg.triple.dirac), "states": states}
    if solver:
        out["solver"] = solver
    return out


def dump_config(cfg: TripleConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2)
