"""Scenario files: named states, effects, operations, observables, and
instruments in one JSON document.

Schema (version 1): a top-level object with ``schema``, ``model``
("classical" or "quantum"), ``dim``, optional ``defaults`` (``tol``,
``seed``, ``shots``), and the named collections.  Classical vectors and
matrices are plain nested arrays of reals; quantum matrices are row-major
nested arrays whose entries are ``[re, im]`` pairs (bare reals are
accepted on input).  Quantum states are given as ``{"vector": ...}``
(pure) or ``{"matrix": ...}`` (density operator).  Operations and
instruments are tagged by ``kind``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from . import classical as cl
from . import quantum as qm
from .config import DEFAULT_SEED, DEFAULT_SHOTS, DEFAULT_TOL
from .errors import QtransError, ScenarioError, ScenarioParseError
from .hilbert import DensityOperator, PureState, QEffect, validate_operator

SCHEMA_VERSION = 1

CLASSICAL_OPERATION_KINDS = ("matrix", "holevo", "holevo-mixed")
QUANTUM_OPERATION_KINDS = ("kraus", "luders", "holevo")
INSTRUMENT_KINDS = ("operations", "holevo", "luders")


@dataclass
class Scenario:
    """A fully resolved and validated scenario."""

    model: str
    dim: int
    tol: float
    seed: int
    shots: int
    states: dict[str, Any] = field(default_factory=dict)
    effects: dict[str, Any] = field(default_factory=dict)
    operations: dict[str, Any] = field(default_factory=dict)
    observables: dict[str, Any] = field(default_factory=dict)
    instruments: dict[str, Any] = field(default_factory=dict)

    def lookup(self, collection: str, name: str):
        table = getattr(self, collection)
        if name not in table:
            raise ScenarioError(
                f"unknown {collection[:-1]} {name!r}; available: {sorted(table)}"
            )
        return table[name]


def read_scenario_file(path) -> dict:
    """Read and JSON-parse a scenario file (structural errors only)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"scenario {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioParseError(f"scenario {path} must be a JSON object")
    return data


def _complex_entry(entry, where: str) -> complex:
    if isinstance(entry, (int, float)):
        return complex(entry, 0.0)
    if isinstance(entry, list) and len(entry) == 2 and all(
        isinstance(v, (int, float)) for v in entry
    ):
        return complex(entry[0], entry[1])
    raise ScenarioError(f"{where}: complex entries must be numbers or [re, im] pairs")


def _complex_matrix(data, dim: int, where: str) -> np.ndarray:
    if not isinstance(data, list) or len(data) != dim:
        raise ScenarioError(f"{where}: expected {dim} matrix rows")
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(data):
        if not isinstance(row, list) or len(row) != dim:
            raise ScenarioError(f"{where}: row {i} must have {dim} entries")
        for j, entry in enumerate(row):
            out[i, j] = _complex_entry(entry, f"{where}[{i}][{j}]")
    return out


def _complex_vector(data, dim: int, where: str) -> np.ndarray:
    if not isinstance(data, list) or len(data) != dim:
        raise ScenarioError(f"{where}: expected a vector of length {dim}")
    return np.array([_complex_entry(e, f"{where}[{i}]") for i, e in enumerate(data)])


def _real_array(data, shape: tuple, where: str) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.shape != shape:
        raise ScenarioError(f"{where}: expected shape {shape}, got {arr.shape}")
    return arr


class _Builder:
    """Constructs scenario objects one at a time, recording failures
    instead of stopping, so validation can report everything at once."""

    def __init__(self, data: Mapping, *, tol: float | None = None):
        if data.get("schema") != SCHEMA_VERSION:
            raise ScenarioParseError(
                f"unsupported schema {data.get('schema')!r}; expected {SCHEMA_VERSION}"
            )
        model = data.get("model")
        if model not in ("classical", "quantum"):
            raise ScenarioParseError(f"model must be 'classical' or 'quantum', got {model!r}")
        dim = data.get("dim")
        if not isinstance(dim, int) or dim < 1:
            raise ScenarioParseError(f"dim must be a positive integer, got {dim!r}")
        defaults = data.get("defaults", {})
        self.data = data
        self.scenario = Scenario(
            model=model,
            dim=dim,
            tol=float(tol if tol is not None else defaults.get("tol", DEFAULT_TOL)),
            seed=int(defaults.get("seed", DEFAULT_SEED)),
            shots=int(defaults.get("shots", DEFAULT_SHOTS)),
        )
        self.records: list[dict] = []

    def run(self) -> Scenario:
        self._section("effects", self._build_effect)
        self._section("states", self._build_state)
        self._section("observables", self._build_observable)
        self._section("operations", self._build_operation)
        self._section("instruments", self._build_instrument)
        return self.scenario

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.records)

    def _section(self, section: str, build) -> None:
        entries = self.data.get(section, {})
        if not isinstance(entries, dict):
            raise ScenarioParseError(f"{section} must be an object of named entries")
        for name in sorted(entries):
            record = {"kind": section[:-1], "name": name, "ok": True, "failures": []}
            try:
                obj = build(name, entries[name])
                getattr(self.scenario, section)[name] = obj
                record.update(self._detail(obj))
            except QtransError as exc:
                record["ok"] = False
                record["failures"].append(str(exc))
            self.records.append(record)

    def _detail(self, obj) -> dict:
        # Attach measured numbers for quantum operators so validation
        # reports show how close an object sits to its constraints.
        if isinstance(obj, QEffect):
            return {"report": validate_operator(obj.matrix, "effect").to_jsonable()}
        if isinstance(obj, DensityOperator):
            return {"report": validate_operator(obj.matrix, "density").to_jsonable()}
        return {}

    # -- per-kind builders ------------------------------------------------

    def _build_effect(self, name: str, spec):
        dim, tol = self.scenario.dim, self.scenario.tol
        if self.scenario.model == "classical":
            return cl.ClassicalEffect(_real_array(spec, (dim,), f"effect {name}"), tol=tol)
        if not isinstance(spec, dict) or "matrix" not in spec:
            raise ScenarioError(f"effect {name}: quantum effects need a 'matrix' field")
        return QEffect(_complex_matrix(spec["matrix"], dim, f"effect {name}"), tol=tol)

    def _build_state(self, name: str, spec):
        dim, tol = self.scenario.dim, self.scenario.tol
        if self.scenario.model == "classical":
            return cl.ClassicalSubstate(_real_array(spec, (dim,), f"state {name}"), tol=tol)
        if isinstance(spec, dict) and "vector" in spec:
            return PureState(_complex_vector(spec["vector"], dim, f"state {name}"), tol=tol)
        if isinstance(spec, dict) and "matrix" in spec:
            return DensityOperator(
                _complex_matrix(spec["matrix"], dim, f"state {name}"), tol=tol
            )
        raise ScenarioError(f"state {name}: quantum states need 'vector' or 'matrix'")

    def _build_observable(self, name: str, spec):
        if not isinstance(spec, dict) or not spec:
            raise ScenarioError(f"observable {name}: expected outcome -> effect-name map")
        effects = {
            outcome: self.scenario.lookup("effects", ref) for outcome, ref in spec.items()
        }
        tol = self.scenario.tol
        if self.scenario.model == "classical":
            return cl.Observable(effects, tol=tol)
        return qm.QObservable(effects, tol=tol)

    def _holevo_targets(self, name: str, obs, spec) -> dict:
        states = spec.get("states")
        if not isinstance(states, dict):
            raise ScenarioError(f"{name}: holevo construction needs a 'states' map")
        return {outcome: self.scenario.lookup("states", ref) for outcome, ref in states.items()}

    def _build_operation(self, name: str, spec):
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ScenarioError(f"operation {name}: expected an object with a 'kind' tag")
        kind = spec["kind"]
        dim, tol = self.scenario.dim, self.scenario.tol
        if self.scenario.model == "classical":
            if kind not in CLASSICAL_OPERATION_KINDS:
                raise ScenarioError(
                    f"operation {name}: kind {kind!r} not in {CLASSICAL_OPERATION_KINDS}"
                )
            if kind == "matrix":
                return cl.ClassicalOperation(
                    _real_array(spec.get("matrix"), (dim, dim), f"operation {name}"), tol=tol
                )
            if kind == "holevo":
                return cl.holevo_pure(
                    self.scenario.lookup("effects", spec.get("effect")),
                    self.scenario.lookup("states", spec.get("state")),
                    tol=tol,
                )
            obs = self.scenario.lookup("observables", spec.get("observable"))
            return cl.holevo_mixed(obs, self._holevo_targets(f"operation {name}", obs, spec), tol=tol)
        if kind not in QUANTUM_OPERATION_KINDS:
            raise ScenarioError(
                f"operation {name}: kind {kind!r} not in {QUANTUM_OPERATION_KINDS}"
            )
        if kind == "kraus":
            mats = spec.get("kraus")
            if not isinstance(mats, list) or not mats:
                raise ScenarioError(f"operation {name}: 'kraus' must list at least one matrix")
            return qm.KrausOperation(
                [_complex_matrix(m, dim, f"operation {name} kraus[{i}]") for i, m in enumerate(mats)],
                tol=tol,
            )
        if kind == "luders":
            return qm.LudersOperation(self.scenario.lookup("effects", spec.get("effect")), tol=tol)
        state = self.scenario.lookup("states", spec.get("state"))
        if isinstance(state, PureState):
            state = state.density()
        return qm.QHolevoOperation(
            self.scenario.lookup("effects", spec.get("effect")), state, tol=tol
        )

    def _build_instrument(self, name: str, spec):
        if not isinstance(spec, dict) or "kind" not in spec:
            raise ScenarioError(f"instrument {name}: expected an object with a 'kind' tag")
        kind = spec["kind"]
        tol = self.scenario.tol
        classical = self.scenario.model == "classical"
        if kind not in INSTRUMENT_KINDS or (kind == "luders" and classical):
            allowed = [k for k in INSTRUMENT_KINDS if not (classical and k == "luders")]
            raise ScenarioError(f"instrument {name}: kind {kind!r} not in {allowed}")
        if kind == "operations":
            ops_spec = spec.get("operations")
            if not isinstance(ops_spec, dict) or not ops_spec:
                raise ScenarioError(f"instrument {name}: 'operations' must map outcomes to names")
            ops = {
                outcome: self.scenario.lookup("operations", ref)
                for outcome, ref in ops_spec.items()
            }
            return cl.Instrument(ops, tol=tol) if classical else qm.QInstrument(ops, tol=tol)
        obs = self.scenario.lookup("observables", spec.get("observable"))
        if kind == "luders":
            return qm.luders_instrument(obs)
        targets = self._holevo_targets(f"instrument {name}", obs, spec)
        if classical:
            return cl.holevo_instrument(obs, targets, tol=tol)
        targets = {
            x: (t.density() if isinstance(t, PureState) else t) for x, t in targets.items()
        }
        return qm.QInstrument(
            {x: qm.QHolevoOperation(obs[x], targets[x], tol=tol) for x in obs.outcomes},
            tol=tol,
        )


def load_scenario(path, *, tol: float | None = None) -> Scenario:
    """Load a scenario, failing on the first invalid object."""
    builder = _Builder(read_scenario_file(path), tol=tol)
    scenario = builder.run()
    for record in builder.records:
        if not record["ok"]:
            raise ScenarioError(
                f"{record['kind']} {record['name']!r}: " + "; ".join(record["failures"])
            )
    return scenario


def validate_scenario(path, *, tol: float | None = None):
    """Build every object, collecting a per-object report instead of
    stopping at the first failure.

    Returns ``(scenario, records, ok)``; invalid objects are simply
    missing from the scenario's collections.
    """
    builder = _Builder(read_scenario_file(path), tol=tol)
    scenario = builder.run()
    return scenario, builder.records, builder.ok
