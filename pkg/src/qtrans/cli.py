"""Scenario-driven command line front end.

Verbs: ``validate``, ``tp-effect``, ``tp-state``, ``joint``, ``check``,
``sample``, ``dist``.  Output is a deterministic human-readable report by
default or JSON with ``--format json``; numbers are printed with 12
significant digits and named objects in sorted order, so identical
invocations produce byte-identical output.

Exit codes: 0 success, 1 validation failure, 2 undefined transition,
3 statistical check failure, 4 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import classical as cl
from . import quantum as qm
from . import oracle
from .config import DEFAULT_TOL, DEFAULT_Z_MAX
from .errors import (
    QtransError,
    ScenarioError,
    ScenarioParseError,
    TransitionUndefinedError,
)
from .hilbert import DensityOperator, PureState
from .scenario import Scenario, load_scenario, validate_scenario
from .tables import DistributionTable

TOL_ENV_VAR = "QTRANS_TOL"

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNDEFINED = 2
EXIT_STATISTICAL = 3
EXIT_USAGE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 by default, which collides with the
    # undefined-transition exit code; route usage problems to 4 instead.
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# formatting

def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        return f"{value:.12g}"
    return str(value)


def _fmt_nested(value) -> str:
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_fmt_nested(v) for v in value) + "]"
    return _fmt(value)


def _round_floats(doc):
    if isinstance(doc, float):
        return float(f"{doc:.12g}") if math.isfinite(doc) else _fmt(doc)
    if isinstance(doc, dict):
        return {k: _round_floats(v) for k, v in doc.items()}
    if isinstance(doc, (list, tuple)):
        return [_round_floats(v) for v in doc]
    return doc


def _grid_lines(axes, values, indent: str) -> list[str]:
    values = np.asarray(values)
    if len(axes) == 1:
        return [f"{indent}{label}: {_fmt(float(v))}" for label, v in zip(axes[0], values)]
    if len(axes) == 2:
        rows, cols = axes
        cells = [[""] + list(cols)]
        for i, r in enumerate(rows):
            cells.append([str(r)] + [_fmt(float(values[i, j])) for j in range(len(cols))])
        widths = [max(len(row[c]) for row in cells) for c in range(len(cols) + 1)]
        return [
            indent + "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
            for row in cells
        ]
    lines = []
    for i, label in enumerate(axes[0]):
        lines.append(f"{indent}[{label}]")
        lines.extend(_grid_lines(axes[1:], values[i], indent + "  "))
    return lines


def _doc_lines(doc, indent: int = 0) -> list[str]:
    pad = " " * indent
    lines: list[str] = []
    for key, value in doc.items():
        if isinstance(value, dict) and set(value) == {"axes", "values"}:
            lines.append(f"{pad}{key}:")
            lines.extend(_grid_lines(value["axes"], value["values"], pad + "  "))
        elif isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_doc_lines(value, indent + 2))
        elif isinstance(value, (list, tuple)) and all(
            not isinstance(v, (dict, list, tuple)) for v in value
        ):
            lines.append(f"{pad}{key}: " + _fmt_nested(value))
        elif isinstance(value, (list, tuple)):
            lines.append(f"{pad}{key}:")
            for item in value:
                if isinstance(item, dict):
                    lines.append(f"{pad}  -")
                    lines.extend(_doc_lines(item, indent + 4))
                else:
                    lines.append(f"{pad}  - {_fmt_nested(item)}")
        else:
            lines.append(f"{pad}{key}: {_fmt(value)}")
    return lines


def _emit(doc: dict, fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(_round_floats(doc), indent=2) + "\n")
    else:
        sys.stdout.write("\n".join(_doc_lines(doc)) + "\n")


def _table_doc(table: DistributionTable) -> dict:
    return table.to_jsonable()


# ---------------------------------------------------------------------------
# shared plumbing

def _env_tol() -> float | None:
    raw = os.environ.get(TOL_ENV_VAR)
    if raw is None:
        return None
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"{TOL_ENV_VAR} must be a float, got {raw!r}")


def _load(args) -> Scenario:
    tol = args.tol if args.tol is not None else _env_tol()
    scenario = load_scenario(args.scenario, tol=tol)
    if getattr(args, "seed", None) is not None:
        scenario.seed = args.seed
    if getattr(args, "shots", None) is not None:
        if args.shots < 1:
            raise UsageError(f"--shots must be at least 1, got {args.shots}")
        scenario.shots = args.shots
    return scenario


def _get(scenario: Scenario, collection: str, name: str):
    try:
        return scenario.lookup(collection, name)
    except ScenarioError as exc:
        raise UsageError(str(exc))


def _normalized_update(scenario: Scenario, op, state):
    if scenario.model == "classical":
        return cl.substate_normalize(cl.apply_operation(op, state), tol=scenario.tol)
    return qm.q_update_state(op, state, tol=scenario.tol)


def _state_total_after(scenario: Scenario, op, state) -> float:
    if scenario.model == "classical":
        return cl.apply_operation(op, state).total()
    return float(np.trace(qm.q_apply(op, state)).real)


# ---------------------------------------------------------------------------
# commands

def cmd_validate(args) -> int:
    tol = args.tol if args.tol is not None else _env_tol()
    scenario, records, ok = validate_scenario(args.scenario, tol=tol)
    doc = {
        "command": "validate",
        "scenario": args.scenario,
        "model": scenario.model,
        "dim": scenario.dim,
        "tol": scenario.tol,
        "objects": records,
        "ok": ok,
    }
    _emit(doc, args.format)
    return EXIT_OK if ok else EXIT_INVALID


def cmd_tp_effect(args) -> int:
    scenario = _load(args)
    state = _get(scenario, "states", args.state)
    op = _get(scenario, "operations", args.operation)
    eff_a = _get(scenario, "effects", args.effect_a)
    eff_b = _get(scenario, "effects", args.effect_b)
    if scenario.model == "classical":
        value = cl.transition_prob_effect(state, op, eff_a, eff_b, tol=scenario.tol)
        path = "classical"
    else:
        value = qm.q_transition_effect(state, op, eff_a, eff_b, tol=scenario.tol)
        path = qm.transition_path(state, op)
    doc = {
        "command": "tp-effect",
        "scenario": args.scenario,
        "state": args.state,
        "operation": args.operation,
        "effect_a": args.effect_a,
        "effect_b": args.effect_b,
        "path": path,
        "value": value,
    }
    if args.check:
        label = f"tp-effect:{args.state}:{args.operation}:{args.effect_a}:{args.effect_b}"
        report = oracle.sample_transition_effect(
            state, op, eff_a, eff_b, scenario.shots, scenario.seed,
            label=label, tol=scenario.tol,
        )
        doc["check"] = report.to_jsonable()
    _emit(doc, args.format)
    return EXIT_OK


def cmd_tp_state(args) -> int:
    scenario = _load(args)
    s1 = _get(scenario, "states", args.state1)
    s2 = _get(scenario, "states", args.state2)
    doc = {
        "command": "tp-state",
        "scenario": args.scenario,
        "state1": args.state1,
        "state2": args.state2,
    }
    if args.operation is not None:
        op = _get(scenario, "operations", args.operation)
        doc["operation"] = args.operation
        if scenario.model == "classical":
            doc["value"] = cl.transition_prob_state(op, s1, s2)
        else:
            doc["value"] = qm.q_transition_state(op, s1, s2)
    else:
        instrument = _get(scenario, "instruments", args.instrument)
        doc["instrument"] = args.instrument
        if scenario.model == "classical":
            table = cl.instrument_state_transition(instrument, s1, s2)
            per_outcome = {
                x: cl.transition_prob_state(instrument[x], s1, s2)
                for x in instrument.outcomes
            }
        else:
            table = qm.q_instrument_state_transition(instrument, s1, s2)
            per_outcome = {
                x: qm.q_transition_state(instrument[x], s1, s2)
                for x in instrument.outcomes
            }
        doc["table"] = _table_doc(table)
        doc["marginal_first"] = _table_doc(table.marginal(0))
        doc["marginal_second"] = _table_doc(table.marginal(1))
        doc["per_outcome_operation"] = per_outcome
        doc["total"] = table.total()
    _emit(doc, args.format)
    return EXIT_OK


def cmd_joint(args) -> int:
    scenario = _load(args)
    state = _get(scenario, "states", args.state)
    obs_a = _get(scenario, "observables", args.observable_a)
    obs_b = _get(scenario, "observables", args.observable_b)
    classical = scenario.model == "classical"
    doc = {
        "command": "joint",
        "scenario": args.scenario,
        "state": args.state,
        "observable_a": args.observable_a,
        "observable_b": args.observable_b,
    }
    if args.operation is not None:
        op = _get(scenario, "operations", args.operation)
        doc["operation"] = args.operation
        if classical:
            table = cl.joint_effect_distribution(state, op, obs_a, obs_b, tol=scenario.tol)
            dist_a = cl.observable_distribution(state, obs_a)
            dist_b = cl.observable_distribution(_normalized_update(scenario, op, state), obs_b)
        else:
            table = qm.q_joint_effect_distribution(state, op, obs_a, obs_b, tol=scenario.tol)
            dist_a = qm.q_observable_distribution(state, obs_a)
            dist_b = qm.q_observable_distribution(_normalized_update(scenario, op, state), obs_b)
        expectations = [("first_observable", 0, dist_a), ("updated_second_observable", 1, dist_b)]
    else:
        instrument = _get(scenario, "instruments", args.instrument)
        doc["instrument"] = args.instrument
        if classical:
            table = cl.instrument_joint_distribution(state, instrument, obs_a, obs_b)
            dist_i = cl.instrument_distribution(state, instrument)
            dist_a = cl.observable_distribution(state, obs_a)
            pushed = cl.apply_operation(instrument.total_operation(), state)
            dist_b = cl.observable_distribution(pushed, obs_b)
        else:
            table = qm.q_instrument_joint_distribution(state, instrument, obs_a, obs_b)
            dist_i = qm.q_instrument_distribution(state, instrument)
            dist_a = qm.q_observable_distribution(state, obs_a)
            dist_b = qm.q_observable_distribution(instrument.apply_total(state), obs_b)
        expectations = [
            ("instrument", 0, dist_i),
            ("first_observable", 1, dist_a),
            ("channel_updated_second_observable", 2, dist_b),
        ]
    doc["table"] = _table_doc(table)
    doc["total"] = table.total()
    marginals = {}
    for name, axis, expected in expectations:
        got = table.marginal(axis)
        marginals[name] = {
            "axis": axis,
            "marginal": _table_doc(got),
            "analytic": _table_doc(expected),
            "max_deviation": got.max_abs_diff(expected),
        }
    doc["marginals"] = marginals
    _emit(doc, args.format)
    return EXIT_OK


def _check_operation(scenario: Scenario, name: str, op) -> dict:
    tol = scenario.tol
    out: dict = {"target": name, "kind": "operation"}
    if scenario.model == "classical":
        out["repeatable_deviation"] = cl.repeatable_deviation(op)
        out["repeatable"] = cl.is_repeatable(op)
        colsums = op.matrix.sum(axis=0)
        out["channel_deviation"] = float(np.max(np.abs(colsums - 1.0)))
        out["channel"] = op.is_channel
        eff = cl.measured_effect(op)
        out["measured_effect"] = eff.values.tolist()
        basis = [cl.ClassicalSubstate(row) for row in np.eye(op.dim)]
        out["measured_effect_deviation"] = max(
            abs(cl.state_eval(s, eff) - cl.apply_operation(op, s).total()) for s in basis
        )
    else:
        out["repeatable_deviation"] = qm.q_repeatable_deviation(op)
        out["repeatable"] = qm.q_is_repeatable(op)
        out["channel_deviation"] = qm.channel_deviation(op)
        out["channel"] = out["channel_deviation"] <= tol
        eff = qm.q_measured_effect(op)
        out["measured_effect"] = _complex_doc(eff.matrix)
        out["measured_effect_deviation"] = max(
            abs(float(np.trace(rho @ eff.matrix).real)
                - float(np.trace(qm.q_apply(op, rho)).real))
            for rho in qm.spanning_density_matrices(op.dim)
        )
        if isinstance(op, qm.LudersOperation):
            c = op.effect.matrix
            proj_dev = float(np.max(np.abs(c @ c - c)))
            out["projection_deviation"] = proj_dev
            out["projection"] = proj_dev <= 1e-8
            out["repeatable_iff_projection"] = out["projection"] == out["repeatable"]
    return out


def _check_instrument(scenario: Scenario, name: str, instrument) -> dict:
    out: dict = {"target": name, "kind": "instrument", "outcomes": list(instrument.outcomes)}
    if scenario.model == "classical":
        total = instrument.total_operation()
        out["channel_deviation"] = float(np.max(np.abs(total.matrix.sum(axis=0) - 1.0)))
        out["per_outcome_repeatable"] = {
            x: cl.is_repeatable(instrument[x]) for x in instrument.outcomes
        }
    else:
        total = sum(
            qm.q_measured_effect(instrument[x]).matrix for x in instrument.outcomes
        )
        out["channel_deviation"] = float(np.max(np.abs(total - np.eye(instrument.dim))))
        out["per_outcome_repeatable"] = {
            x: qm.q_is_repeatable(instrument[x]) for x in instrument.outcomes
        }
    out["channel"] = out["channel_deviation"] <= scenario.tol
    return out


def _complex_doc(matrix: np.ndarray) -> list:
    return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(matrix)]


def cmd_check(args) -> int:
    scenario = _load(args)
    doc = {"command": "check", "scenario": args.scenario}
    if args.target in scenario.operations:
        doc.update(_check_operation(scenario, args.target, scenario.operations[args.target]))
    elif args.target in scenario.instruments:
        doc.update(_check_instrument(scenario, args.target, scenario.instruments[args.target]))
    else:
        raise UsageError(
            f"unknown target {args.target!r}; operations: {sorted(scenario.operations)}, "
            f"instruments: {sorted(scenario.instruments)}"
        )
    _emit(doc, args.format)
    return EXIT_OK


def cmd_sample(args) -> int:
    scenario = _load(args)
    parts = args.quantity.split(":")
    kind = parts[0] if parts else ""
    doc = {
        "command": "sample",
        "scenario": args.scenario,
        "quantity": args.quantity,
        "shots": scenario.shots,
        "seed": scenario.seed,
    }

    if kind == "born" and len(parts) == 3:
        state = _get(scenario, "states", parts[1])
        effect = _get(scenario, "effects", parts[2])
        report = oracle.sample_effect(
            state, effect, scenario.shots, scenario.seed, label=args.quantity
        )
    elif kind == "tp-effect" and len(parts) == 5:
        state = _get(scenario, "states", parts[1])
        op = _get(scenario, "operations", parts[2])
        eff_a = _get(scenario, "effects", parts[3])
        eff_b = _get(scenario, "effects", parts[4])
        report = oracle.sample_transition_effect(
            state, op, eff_a, eff_b, scenario.shots, scenario.seed,
            label=args.quantity, tol=scenario.tol,
        )
    elif kind == "tp-state" and len(parts) == 4:
        op = _get(scenario, "operations", parts[1])
        s1 = _get(scenario, "states", parts[2])
        s2 = _get(scenario, "states", parts[3])
        report = oracle.sample_transition_state(
            op, s1, s2, scenario.shots, scenario.seed, label=args.quantity
        )
    elif kind == "dist" and len(parts) == 3:
        state = _get(scenario, "states", parts[1])
        instrument = _get(scenario, "instruments", parts[2])
        empirical = oracle.sample_instrument(
            state, instrument, scenario.shots, scenario.seed, label=args.quantity
        )
        if scenario.model == "classical":
            analytic = cl.instrument_distribution(state, instrument)
        else:
            analytic = qm.q_instrument_distribution(state, instrument)
        z = oracle.max_cell_z(empirical, analytic, scenario.shots)
        doc.update(
            {
                "empirical": _table_doc(empirical),
                "analytic": _table_doc(analytic),
                "max_z": z,
                "rng_id": oracle.RNG_ID,
                "z_max": args.z_max,
                "passed": z <= args.z_max,
            }
        )
        _emit(doc, args.format)
        return EXIT_OK if z <= args.z_max else EXIT_STATISTICAL
    else:
        raise UsageError(
            f"unknown quantity spec {args.quantity!r}; expected born:STATE:EFFECT, "
            "tp-effect:STATE:OP:EFFECT:EFFECT, tp-state:OP:STATE:STATE, or "
            "dist:STATE:INSTRUMENT"
        )

    doc.update(report.to_jsonable())
    doc["z_max"] = args.z_max
    doc["passed"] = report.z_score <= args.z_max
    _emit(doc, args.format)
    return EXIT_OK if report.z_score <= args.z_max else EXIT_STATISTICAL


def cmd_dist(args) -> int:
    scenario = _load(args)
    state = _get(scenario, "states", args.state)
    doc = {"command": "dist", "scenario": args.scenario, "state": args.state}
    if args.observable is not None:
        obs = _get(scenario, "observables", args.observable)
        doc["observable"] = args.observable
        if scenario.model == "classical":
            table = cl.observable_distribution(state, obs)
        else:
            table = qm.q_observable_distribution(state, obs)
    else:
        instrument = _get(scenario, "instruments", args.instrument)
        doc["instrument"] = args.instrument
        if scenario.model == "classical":
            table = cl.instrument_distribution(state, instrument)
        else:
            table = qm.q_instrument_distribution(state, instrument)
    doc["distribution"] = _table_doc(table)
    doc["total"] = table.total()
    _emit(doc, args.format)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser

def _add_common(sub) -> None:
    sub.add_argument("scenario", help="path to a scenario JSON file")
    sub.add_argument("--tol", type=float, default=None,
                     help=f"tolerance override (or set {TOL_ENV_VAR})")
    sub.add_argument("--format", choices=("table", "json"), default="table")


def _add_sampling(sub) -> None:
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--shots", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qtrans", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    subs = parser.add_subparsers(dest="verb", required=True)

    p = subs.add_parser("validate", help="validate every object in a scenario")
    _add_common(p)
    p.set_defaults(func=cmd_validate)

    p = subs.add_parser("tp-effect", help="transition probability of one effect then another")
    _add_common(p)
    _add_sampling(p)
    p.add_argument("--state", required=True)
    p.add_argument("--operation", required=True)
    p.add_argument("--effect-a", required=True)
    p.add_argument("--effect-b", required=True)
    p.add_argument("--check", action="store_true",
                   help="also run the sampling oracle and report its z-score")
    p.set_defaults(func=cmd_tp_effect)

    p = subs.add_parser("tp-state", help="transition probability between two states")
    _add_common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--operation")
    group.add_argument("--instrument")
    p.add_argument("--state1", required=True)
    p.add_argument("--state2", required=True)
    p.set_defaults(func=cmd_tp_state)

    p = subs.add_parser("joint", help="joint outcome tables with marginal checks")
    _add_common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--operation")
    group.add_argument("--instrument")
    p.add_argument("--state", required=True)
    p.add_argument("--observable-a", required=True)
    p.add_argument("--observable-b", required=True)
    p.set_defaults(func=cmd_joint)

    p = subs.add_parser("check", help="repeatability/channel/measured-effect checks")
    _add_common(p)
    p.add_argument("--target", required=True, help="operation or instrument name")
    p.set_defaults(func=cmd_check)

    p = subs.add_parser("sample", help="Monte-Carlo estimate of a quantity")
    _add_common(p)
    _add_sampling(p)
    p.add_argument("--quantity", required=True,
                   help="born:STATE:EFFECT | tp-effect:STATE:OP:EFF:EFF | "
                        "tp-state:OP:STATE:STATE | dist:STATE:INSTRUMENT")
    p.add_argument("--z-max", type=float, default=DEFAULT_Z_MAX)
    p.set_defaults(func=cmd_sample)

    p = subs.add_parser("dist", help="observable or instrument distribution in a state")
    _add_common(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--observable")
    group.add_argument("--instrument")
    p.add_argument("--state", required=True)
    p.set_defaults(func=cmd_dist)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ScenarioParseError as exc:
        sys.stderr.write(f"parse error: {exc}\n")
        return EXIT_USAGE
    except TransitionUndefinedError as exc:
        sys.stderr.write(f"undefined transition: {exc}\n")
        return EXIT_UNDEFINED
    except QtransError as exc:
        sys.stderr.write(f"invalid: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
