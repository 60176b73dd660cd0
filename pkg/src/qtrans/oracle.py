"""Independent verification of the closed-form probabilities.

Two kinds of oracle live here: Monte-Carlo samplers that re-derive
measurement statistics from Bernoulli/categorical draws, and exhaustive
enumeration that re-sums distribution tables entry by entry.  Neither
shares code with the analytic table constructions.

Every sampling call owns a private generator derived from the pair
``(seed, label)``: the Philox4x64 counter-based generator keyed with the
first 128 bits of ``sha256("{seed}:{label}")``.  Identical pairs give
bit-identical results; distinct labels give independent streams, so calls
may run concurrently.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Union

import numpy as np

from . import classical as cl
from . import quantum as qm
from .config import DEFAULT_SEED, DEFAULT_SHOTS, DEFAULT_TOL
from .errors import ValidationError
from .hilbert import DensityOperator, PureState, QEffect, born
from .tables import DistributionTable

__all__ = [
    "RNG_ID",
    "SampleReport",
    "CheckReport",
    "make_rng",
    "sample_effect",
    "sample_transition_effect",
    "sample_transition_state",
    "sample_instrument",
    "max_cell_z",
    "enumerate_check",
    "convexity_probe",
]

RNG_ID = "philox4x64/sha256(seed:label)"

ModelState = Union[cl.ClassicalSubstate, DensityOperator, PureState]
ModelEffect = Union[cl.ClassicalEffect, QEffect]


def make_rng(seed: int, label: str) -> np.random.Generator:
    """Private generator for one sampling call; see the module docstring
    for the derivation."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    key = np.frombuffer(digest[:16], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class SampleReport:
    """A sampled estimate next to its analytic target.

    ``std_error`` uses sqrt(p(1-p)/shots) per Bernoulli factor, combined
    by first-order propagation when the estimate is a product.  The
    z-score is zero when both deviation and standard error vanish, and
    infinite when only the standard error does.
    """

    label: str
    estimate: float
    analytic: float
    std_error: float
    z_score: float
    shots: int
    seed: int
    rng_id: str = RNG_ID

    def to_jsonable(self) -> dict:
        return {
            "label": self.label,
            "estimate": self.estimate,
            "analytic": self.analytic,
            "std_error": self.std_error,
            "z_score": self.z_score,
            "shots": self.shots,
            "seed": self.seed,
            "rng_id": self.rng_id,
        }


def _zscore(estimate: float, analytic: float, std_error: float) -> float:
    gap = abs(estimate - analytic)
    if std_error > 0.0:
        return gap / std_error
    return 0.0 if gap == 0.0 else math.inf


def _report(label, estimate, analytic, std_error, shots, seed) -> SampleReport:
    return SampleReport(
        label=label,
        estimate=float(estimate),
        analytic=float(analytic),
        std_error=float(std_error),
        z_score=_zscore(estimate, analytic, std_error),
        shots=shots,
        seed=seed,
    )


def _occurrence_prob(state: ModelState, effect: ModelEffect) -> float:
    if isinstance(state, cl.ClassicalSubstate):
        return cl.state_eval(state, effect)
    return born(state, effect)


def _bernoulli_freq(rng: np.random.Generator, p: float, shots: int) -> float:
    p = min(max(p, 0.0), 1.0)
    return np.count_nonzero(rng.random(shots) < p) / shots


def _check_shots(shots: int) -> None:
    if shots < 1:
        raise ValidationError(f"shots must be at least 1, got {shots}")


def sample_effect(
    state: ModelState,
    effect: ModelEffect,
    shots: int = DEFAULT_SHOTS,
    seed: int = DEFAULT_SEED,
    *,
    label: str = "effect",
) -> SampleReport:
    """Estimate an effect's occurrence probability by Bernoulli sampling."""
    _check_shots(shots)
    p = _occurrence_prob(state, effect)
    freq = _bernoulli_freq(make_rng(seed, label), p, shots)
    se = math.sqrt(freq * (1.0 - freq) / shots)
    return _report(label, freq, p, se, shots, seed)


def sample_transition_effect(
    state,
    op,
    effect_a,
    effect_b,
    shots: int = DEFAULT_SHOTS,
    seed: int = DEFAULT_SEED,
    *,
    label: str = "transition-effect",
    tol: float = DEFAULT_TOL,
) -> SampleReport:
    """Two-stage estimate of the effect-to-effect transition probability.

    The transition probability multiplies probabilities from two distinct
    experimental runs, so the two factors are sampled independently: one
    Bernoulli run for the first effect in the initial state, one for the
    second effect in the updated state.
    """
    _check_shots(shots)
    if isinstance(state, cl.ClassicalSubstate):
        analytic = cl.transition_prob_effect(state, op, effect_a, effect_b, tol=tol)
        p1 = cl.state_eval(state, effect_a)
        updated = cl.substate_normalize(cl.apply_operation(op, state), tol=tol)
        p2 = cl.state_eval(updated, effect_b)
    else:
        analytic = qm.q_transition_effect(state, op, effect_a, effect_b, tol=tol)
        p1 = born(state, effect_a)
        updated = qm.q_update_state(op, state, tol=tol)
        p2 = born(updated, effect_b)
    f1 = _bernoulli_freq(make_rng(seed, f"{label}/stage1"), p1, shots)
    f2 = _bernoulli_freq(make_rng(seed, f"{label}/stage2"), p2, shots)
    se1 = math.sqrt(f1 * (1.0 - f1) / shots)
    se2 = math.sqrt(f2 * (1.0 - f2) / shots)
    se = math.sqrt((f2 * se1) ** 2 + (f1 * se2) ** 2)
    return _report(label, f1 * f2, analytic, se, shots, seed)


def sample_transition_state(
    op,
    s1,
    s2,
    shots: int = DEFAULT_SHOTS,
    seed: int = DEFAULT_SEED,
    *,
    label: str = "transition-state",
) -> SampleReport:
    """Two-stage estimate of the state-to-state transition probability:
    one Bernoulli run for the operation occurring in the first state, one
    for its self-composition occurring in the second."""
    _check_shots(shots)
    if isinstance(s1, cl.ClassicalSubstate):
        analytic = cl.transition_prob_state(op, s1, s2)
        p1 = cl.apply_operation(op, s1).total()
        twice = cl.compose_operations(op, op)
        p2 = cl.apply_operation(twice, s2).total()
    else:
        analytic = qm.q_transition_state(op, s1, s2)
        p1 = float(np.trace(qm.q_apply(op, s1)).real)
        p2 = float(np.trace(qm.q_apply(qm.q_compose(op, op), s2)).real)
    f1 = _bernoulli_freq(make_rng(seed, f"{label}/stage1"), p1, shots)
    f2 = _bernoulli_freq(make_rng(seed, f"{label}/stage2"), p2, shots)
    se1 = math.sqrt(f1 * (1.0 - f1) / shots)
    se2 = math.sqrt(f2 * (1.0 - f2) / shots)
    se = math.sqrt((f2 * se1) ** 2 + (f1 * se2) ** 2)
    return _report(label, f1 * f2, analytic, se, shots, seed)


def sample_instrument(
    state,
    instrument,
    shots: int = DEFAULT_SHOTS,
    seed: int = DEFAULT_SEED,
    *,
    label: str = "instrument",
) -> DistributionTable:
    """Empirical outcome distribution of an instrument by categorical
    sampling; frequencies total one by construction."""
    _check_shots(shots)
    if isinstance(state, cl.ClassicalSubstate):
        probs = [
            cl.apply_operation(instrument[x], state).total() for x in instrument.outcomes
        ]
    else:
        probs = [
            float(np.trace(qm.q_apply(instrument[x], state)).real)
            for x in instrument.outcomes
        ]
    probs = np.clip(np.asarray(probs), 0.0, None)
    edges = np.cumsum(probs)
    draws = make_rng(seed, label).random(shots) * edges[-1]
    indices = np.minimum(np.searchsorted(edges, draws, side="right"), len(probs) - 1)
    counts = np.bincount(indices, minlength=len(probs))
    return DistributionTable([instrument.outcomes], counts / shots)


def max_cell_z(
    empirical: DistributionTable, analytic: DistributionTable, shots: int
) -> float:
    """Largest per-cell z-score of an empirical frequency table against
    its analytic counterpart."""
    if empirical.axes != analytic.axes:
        raise ValidationError("tables are indexed by different outcome labels")
    worst = 0.0
    for f, p in zip(empirical.values.ravel(), analytic.values.ravel()):
        se = math.sqrt(max(p * (1.0 - p), 0.0) / shots)
        worst = max(worst, _zscore(float(f), float(p), se))
    return worst


@dataclass
class CheckReport:
    """Outcome of a pass/fail verification with per-item deviations."""

    name: str
    ok: bool
    items: list[tuple[str, float, bool]] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        return max((dev for _, dev, _ in self.items), default=0.0)

    def to_jsonable(self) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "max_deviation": self.max_deviation,
            "items": [
                {"check": label, "deviation": dev, "passed": passed}
                for label, dev, passed in self.items
            ],
        }


def enumerate_check(
    table: DistributionTable,
    expected_marginals: Optional[Mapping] = None,
    tol: float = 1e-10,
) -> CheckReport:
    """Brute-force re-summation of a probability table.

    Sums the table entry by entry over every axis subset, compares the
    grand total against one, and compares each supplied marginal (keyed
    by the kept axis index or tuple of indices) against the enumerated
    sums.  Marginal values may be arrays or DistributionTables.
    """
    shape = table.values.shape
    items: list[tuple[str, float, bool]] = []

    total = 0.0
    for idx in np.ndindex(*shape):
        total += float(table.values[idx])
    dev = abs(total - 1.0)
    items.append(("total", dev, dev <= tol))

    for keep, expected in (expected_marginals or {}).items():
        keep_t = (keep,) if isinstance(keep, int) else tuple(keep)
        if isinstance(expected, DistributionTable):
            expected = expected.values
        expected = np.asarray(expected, dtype=float)
        acc = np.zeros([shape[k] for k in keep_t])
        for idx in np.ndindex(*shape):
            acc[tuple(idx[k] for k in keep_t)] += float(table.values[idx])
        if acc.shape != expected.shape:
            raise ValidationError(
                f"marginal over axes {keep_t} has shape {acc.shape}, expected {expected.shape}"
            )
        dev = float(np.max(np.abs(acc - expected)))
        items.append((f"marginal{list(keep_t)}", dev, dev <= tol))

    return CheckReport(name="enumerate", ok=all(p for _, _, p in items), items=items)


def _random_classical_substate(rng: np.random.Generator, dim: int) -> np.ndarray:
    weights = rng.random(dim)
    return weights / weights.sum() * rng.uniform(0.1, 1.0)


def _random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def convexity_probe(
    op,
    *,
    dim: Optional[int] = None,
    kind: Optional[str] = None,
    trials: int = 50,
    components: int = 3,
    seed: int = DEFAULT_SEED,
    tol: float = 1e-10,
) -> CheckReport:
    """Check that a substate map commutes with subconvex combinations.

    Draws random substates and coefficients with total at most one and
    compares mapping-the-mixture against mixing-the-images.  Accepts a
    classical operation, a quantum operation, or a bare callable (pass
    ``dim`` and ``kind`` for callables, e.g. to probe a fixture).
    """
    apply_fn: Callable
    if isinstance(op, cl.ClassicalOperation):
        apply_fn, dim, kind = (lambda w: op.matrix @ w), op.dim, "classical"
    elif isinstance(op, (qm.KrausOperation, qm.LudersOperation, qm.QHolevoOperation)):
        apply_fn, dim, kind = (lambda m: qm.q_apply(op, m)), op.dim, "quantum"
    elif callable(op):
        if dim is None or kind not in ("classical", "quantum"):
            raise ValidationError("callables need explicit dim= and kind=")
        apply_fn = op
    else:
        raise ValidationError(f"cannot probe {op!r}")

    rng = make_rng(seed, f"convexity/{kind}/{dim}")
    items = []
    for t in range(trials):
        lam = rng.random(components)
        lam = lam / lam.sum() * rng.uniform(0.1, 1.0)
        if kind == "classical":
            parts = [_random_classical_substate(rng, dim) for _ in range(components)]
        else:
            parts = [_random_density_matrix(rng, dim) for _ in range(components)]
        mixture = sum(l * p for l, p in zip(lam, parts))
        direct = apply_fn(mixture)
        mixed = sum(l * apply_fn(p) for l, p in zip(lam, parts))
        dev = float(np.max(np.abs(np.asarray(direct) - np.asarray(mixed))))
        items.append((f"trial{t}", dev, dev <= tol))
    return CheckReport(name="convexity", ok=all(p for _, _, p in items), items=items)
