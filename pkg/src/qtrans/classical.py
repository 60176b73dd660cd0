"""Finite classical effect algebra: effects, substates, operations,
observables, instruments, and their transition probabilities.

The model lives on a finite outcome set of size ``n``.  An effect is a
vector in ``[0,1]^n`` (a fuzzy event), a substate is a nonnegative weight
vector with total at most one, and an operation is a substochastic matrix
acting on weight vectors.  Channels are exactly the column-stochastic
matrices.  Everything downstream (transition probabilities, joint
measures, Holevo constructions) is built from these three ingredients.
"""

from __future__ import annotations

from typing import Mapping, Optional, Sequence

import numpy as np

from .config import DEFAULT_TOL, REPEATABLE_TOL
from .errors import (
    DimensionMismatchError,
    NormalizationOfZeroError,
    TransitionUndefinedError,
    ValidationError,
)
from .tables import DistributionTable

__all__ = [
    "ClassicalEffect",
    "ClassicalSubstate",
    "ClassicalOperation",
    "Observable",
    "Instrument",
    "effect_oplus",
    "state_eval",
    "substate_normalize",
    "apply_operation",
    "compose_operations",
    "measured_effect",
    "transition_prob_effect",
    "transition_prob_state",
    "joint_effect_distribution",
    "instrument_joint_distribution",
    "instrument_state_transition",
    "holevo_pure",
    "holevo_mixed",
    "holevo_instrument",
    "is_repeatable",
    "repeatable_deviation",
    "observable_distribution",
    "instrument_distribution",
]


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class ClassicalEffect:
    """A yes-no event: one response value in [0, 1] per outcome.

    Values outside [0, 1] beyond ``tol`` are rejected rather than clamped.
    """

    def __init__(self, values: Sequence[float], *, tol: float = DEFAULT_TOL):
        values = np.atleast_1d(np.asarray(values, dtype=float))
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("effect values must form a nonempty vector")
        if not np.all(np.isfinite(values)):
            raise ValidationError("effect values must be finite")
        if np.any(values < -tol) or np.any(values > 1.0 + tol):
            raise ValidationError(
                f"effect values outside [0,1]: min {values.min():.3g}, max {values.max():.3g}"
            )
        self.values = _readonly(values)
        self.dim = values.size

    @classmethod
    def zero(cls, dim: int) -> "ClassicalEffect":
        return cls(np.zeros(dim))

    @classmethod
    def unit(cls, dim: int) -> "ClassicalEffect":
        return cls(np.ones(dim))

    def complement(self) -> "ClassicalEffect":
        """The effect that occurs exactly when this one does not."""
        return ClassicalEffect(1.0 - self.values)

    def __repr__(self) -> str:
        return f"ClassicalEffect({self.values.tolist()})"


class ClassicalSubstate:
    """Nonnegative outcome weights with total at most one.

    Evaluating a substate on an effect gives the occurrence probability
    of that effect.  A substate with total weight one is a state.
    """

    def __init__(self, weights: Sequence[float], *, tol: float = DEFAULT_TOL):
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        if weights.ndim != 1 or weights.size == 0:
            raise ValidationError("substate weights must form a nonempty vector")
        if not np.all(np.isfinite(weights)):
            raise ValidationError("substate weights must be finite")
        if np.any(weights < -tol):
            raise ValidationError(f"negative substate weight (min {weights.min():.3g})")
        if weights.sum() > 1.0 + tol:
            raise ValidationError(f"substate total {weights.sum():.6g} exceeds 1")
        self.weights = _readonly(weights)
        self.dim = weights.size
        self._tol = tol

    @property
    def is_state(self) -> bool:
        return abs(self.total() - 1.0) <= self._tol

    def total(self) -> float:
        """Weight assigned to the unit effect."""
        return float(self.weights.sum())

    def __repr__(self) -> str:
        return f"ClassicalSubstate({self.weights.tolist()})"


class ClassicalOperation:
    """A substochastic matrix acting on substate weight vectors.

    Nonnegative entries with column sums at most one guarantee that
    substates map to substates; all-column-sums-one is the channel case.
    Linearity in the weights is what realizes convexity of the abstract
    substate map.
    """

    def __init__(self, matrix, *, tol: float = DEFAULT_TOL):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
            raise ValidationError(f"operation matrix must be square, got shape {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise ValidationError("operation matrix must be finite")
        if np.any(matrix < -tol):
            raise ValidationError(f"negative matrix entry (min {matrix.min():.3g})")
        colsums = matrix.sum(axis=0)
        if np.any(colsums > 1.0 + tol):
            raise ValidationError(f"column sum {colsums.max():.6g} exceeds 1")
        self.matrix = _readonly(matrix)
        self.dim = matrix.shape[0]
        self._tol = tol

    @classmethod
    def identity(cls, dim: int) -> "ClassicalOperation":
        return cls(np.eye(dim))

    @classmethod
    def zero(cls, dim: int) -> "ClassicalOperation":
        return cls(np.zeros((dim, dim)))

    @property
    def is_channel(self) -> bool:
        return bool(np.max(np.abs(self.matrix.sum(axis=0) - 1.0)) <= self._tol)

    def __repr__(self) -> str:
        return f"ClassicalOperation(dim={self.dim}, channel={self.is_channel})"


class Observable:
    """A finite family of effects, one per outcome label, summing to the
    unit effect."""

    def __init__(self, effects: Mapping[str, ClassicalEffect], *, tol: float = DEFAULT_TOL):
        if not effects:
            raise ValidationError("observable needs at least one outcome")
        self.outcomes: tuple[str, ...] = tuple(sorted(str(x) for x in effects))
        self.effects = {str(x): e for x, e in effects.items()}
        dims = {e.dim for e in self.effects.values()}
        if len(dims) != 1:
            raise DimensionMismatchError(f"observable effects have mixed dims {sorted(dims)}")
        self.dim = dims.pop()
        total = sum(self.effects[x].values for x in self.outcomes)
        if np.max(np.abs(total - 1.0)) > tol:
            raise ValidationError(
                f"observable effects sum to {total.tolist()}, expected the unit effect"
            )

    def __getitem__(self, outcome: str) -> ClassicalEffect:
        return self.effects[outcome]

    def __repr__(self) -> str:
        return f"Observable(outcomes={list(self.outcomes)}, dim={self.dim})"


class Instrument:
    """A finite family of operations whose sum is a channel."""

    def __init__(self, operations: Mapping[str, ClassicalOperation], *, tol: float = DEFAULT_TOL):
        if not operations:
            raise ValidationError("instrument needs at least one outcome")
        self.outcomes: tuple[str, ...] = tuple(sorted(str(x) for x in operations))
        self.operations = {str(x): op for x, op in operations.items()}
        dims = {op.dim for op in self.operations.values()}
        if len(dims) != 1:
            raise DimensionMismatchError(f"instrument operations have mixed dims {sorted(dims)}")
        self.dim = dims.pop()
        total = sum(self.operations[x].matrix for x in self.outcomes)
        colsums = total.sum(axis=0)
        if np.max(np.abs(colsums - 1.0)) > tol:
            raise ValidationError(
                f"instrument operations sum to column sums {colsums.tolist()}, expected a channel"
            )

    def __getitem__(self, outcome: str) -> ClassicalOperation:
        return self.operations[outcome]

    def total_operation(self) -> ClassicalOperation:
        """The channel obtained by summing all outcome operations."""
        return ClassicalOperation(sum(self.operations[x].matrix for x in self.outcomes))

    def __repr__(self) -> str:
        return f"Instrument(outcomes={list(self.outcomes)}, dim={self.dim})"


def _check_dims(*objects) -> int:
    dims = {obj.dim for obj in objects}
    if len(dims) != 1:
        raise DimensionMismatchError(f"mixed dimensions {sorted(dims)}")
    return dims.pop()


def effect_oplus(
    a: ClassicalEffect, b: ClassicalEffect, *, tol: float = DEFAULT_TOL
) -> Optional[ClassicalEffect]:
    """Partial sum of two effects.

    Defined exactly when the entrywise sum stays below one (within
    ``tol``); returns ``None`` when undefined, since partiality is part of
    the algebra rather than an error.  Dimension mismatch, by contrast,
    is an error.
    """
    _check_dims(a, b)
    total = a.values + b.values
    if np.any(total > 1.0 + tol):
        return None
    return ClassicalEffect(total, tol=tol)


def state_eval(s: ClassicalSubstate, a: ClassicalEffect) -> float:
    """Probability that effect ``a`` occurs in (sub)state ``s``."""
    _check_dims(s, a)
    return float(np.dot(s.weights, a.values))


def substate_normalize(s: ClassicalSubstate, *, tol: float = DEFAULT_TOL) -> ClassicalSubstate:
    """Rescale a nonzero substate to a state."""
    total = s.total()
    if total < tol:
        raise NormalizationOfZeroError(f"cannot normalize substate with total {total:.3g}")
    return ClassicalSubstate(s.weights / total)


def apply_operation(op: ClassicalOperation, s: ClassicalSubstate) -> ClassicalSubstate:
    """Act on a substate; output weights are ``matrix @ weights``."""
    _check_dims(op, s)
    return ClassicalSubstate(op.matrix @ s.weights, tol=max(s._tol, op._tol))


def compose_operations(
    first: ClassicalOperation, second: ClassicalOperation
) -> ClassicalOperation:
    """Operation that applies ``second``, then ``first`` (matrix product)."""
    _check_dims(first, second)
    return ClassicalOperation(first.matrix @ second.matrix, tol=max(first._tol, second._tol))


def measured_effect(op: ClassicalOperation) -> ClassicalEffect:
    """The unique effect whose occurrence probability equals the
    operation's occurrence probability in every state.

    For a substochastic matrix this is the vector of column sums.
    """
    return ClassicalEffect(op.matrix.sum(axis=0))


def transition_prob_effect(
    s: ClassicalSubstate,
    op: ClassicalOperation,
    effect_a: ClassicalEffect,
    effect_b: ClassicalEffect,
    *,
    tol: float = DEFAULT_TOL,
) -> float:
    """Probability that ``effect_a`` occurs in ``s`` times the probability
    that ``effect_b`` occurs in the updated state after ``op``.

    The first argument may be a proper substate.  Undefined (a typed
    error, not NaN) when ``op`` annihilates ``s``.
    """
    _check_dims(s, op, effect_a, effect_b)
    out = apply_operation(op, s)
    denom = out.total()
    if denom < tol:
        raise TransitionUndefinedError(
            f"operation sends the state to total weight {denom:.3g}; updated state undefined"
        )
    return state_eval(s, effect_a) * state_eval(out, effect_b) / denom


def transition_prob_state(
    op: ClassicalOperation, s1: ClassicalSubstate, s2: ClassicalSubstate
) -> float:
    """Probability the operation occurs in ``s1`` times the probability
    its self-composition occurs in ``s2``."""
    _check_dims(op, s1, s2)
    _require_state(s1, "s1")
    _require_state(s2, "s2")
    twice = compose_operations(op, op)
    return apply_operation(op, s1).total() * apply_operation(twice, s2).total()


def _require_state(s: ClassicalSubstate, name: str) -> None:
    if not s.is_state:
        raise ValidationError(f"{name} has total weight {s.total():.6g}, expected a state")


def joint_effect_distribution(
    s: ClassicalSubstate,
    op: ClassicalOperation,
    obs_a: Observable,
    obs_b: Observable,
    *,
    tol: float = DEFAULT_TOL,
) -> DistributionTable:
    """Joint outcome table of measuring ``obs_a`` first and ``obs_b``
    after the operation.

    Entry (x, y) is the transition probability of ``obs_a[x]`` then
    ``obs_b[y]``.  For a state input the table is a probability measure
    whose marginals are the distribution of ``obs_a`` in ``s`` and the
    distribution of ``obs_b`` in the updated state.
    """
    _check_dims(s, op, obs_a, obs_b)
    _require_state(s, "s")
    out = apply_operation(op, s)
    denom = out.total()
    if denom < tol:
        raise TransitionUndefinedError("operation annihilates the state; joint table undefined")
    rows = np.array([state_eval(s, obs_a[x]) for x in obs_a.outcomes])
    cols = np.array([state_eval(out, obs_b[y]) / denom for y in obs_b.outcomes])
    return DistributionTable([obs_a.outcomes, obs_b.outcomes], np.outer(rows, cols))


def instrument_joint_distribution(
    s: ClassicalSubstate,
    instrument: Instrument,
    obs_a: Observable,
    obs_b: Observable,
) -> DistributionTable:
    """Three-way table over (instrument outcome z, first observable
    outcome x, second observable outcome y) with entries
    ``s(A_x) * I_z(s)(B_y)``.

    Marginals recover the instrument distribution in ``s``, the first
    observable's distribution in ``s``, and the second observable's
    distribution in the channel-updated state.
    """
    _check_dims(s, instrument, obs_a, obs_b)
    _require_state(s, "s")
    a_vals = np.array([state_eval(s, obs_a[x]) for x in obs_a.outcomes])
    entries = np.empty((len(instrument.outcomes), len(obs_a.outcomes), len(obs_b.outcomes)))
    for i, z in enumerate(instrument.outcomes):
        out = apply_operation(instrument[z], s)
        b_vals = np.array([state_eval(out, obs_b[y]) for y in obs_b.outcomes])
        entries[i] = np.outer(a_vals, b_vals)
    return DistributionTable([instrument.outcomes, obs_a.outcomes, obs_b.outcomes], entries)


def instrument_state_transition(
    instrument: Instrument, s1: ClassicalSubstate, s2: ClassicalSubstate
) -> DistributionTable:
    """Outcome-pair table for the transition from ``s1`` to ``s2``:
    entry (x, y) multiplies the probability of outcome x in ``s1`` by the
    probability of outcome y in the channel-updated ``s2``."""
    _check_dims(instrument, s1, s2)
    _require_state(s1, "s1")
    _require_state(s2, "s2")
    channel = instrument.total_operation()
    pushed = apply_operation(channel, s2)
    first = np.array([apply_operation(instrument[x], s1).total() for x in instrument.outcomes])
    second = np.array(
        [apply_operation(instrument[y], pushed).total() for y in instrument.outcomes]
    )
    return DistributionTable([instrument.outcomes, instrument.outcomes], np.outer(first, second))


def holevo_pure(
    a: ClassicalEffect, alpha: ClassicalSubstate, *, tol: float = DEFAULT_TOL
) -> ClassicalOperation:
    """Operation sending every substate s to ``s(a) * alpha``.

    Realized as the rank-one matrix ``alpha weights (column) x a values
    (row)``; it measures exactly the effect ``a``.
    """
    _check_dims(a, alpha)
    _require_state(alpha, "alpha")
    return ClassicalOperation(np.outer(alpha.weights, a.values), tol=tol)


def holevo_mixed(
    obs: Observable, alphas: Mapping[str, ClassicalSubstate], *, tol: float = DEFAULT_TOL
) -> ClassicalOperation:
    """Channel sending s to the mixture of the per-outcome target states
    weighted by the observable's outcome probabilities."""
    _check_alphas(obs, alphas)
    matrix = sum(holevo_pure(obs[x], alphas[x], tol=tol).matrix for x in obs.outcomes)
    return ClassicalOperation(matrix, tol=tol)


def holevo_instrument(
    obs: Observable, alphas: Mapping[str, ClassicalSubstate], *, tol: float = DEFAULT_TOL
) -> Instrument:
    """Instrument whose outcome-x operation sends s to ``s(A_x) * alpha_x``;
    it measures the observable ``obs``."""
    _check_alphas(obs, alphas)
    return Instrument(
        {x: holevo_pure(obs[x], alphas[x], tol=tol) for x in obs.outcomes}, tol=tol
    )


def _check_alphas(obs: Observable, alphas: Mapping[str, ClassicalSubstate]) -> None:
    if set(alphas) != set(obs.outcomes):
        raise ValidationError(
            f"target states labeled {sorted(alphas)} do not match outcomes {list(obs.outcomes)}"
        )


def repeatable_deviation(op: ClassicalOperation) -> float:
    """Max-entry distance between the operation applied twice and once."""
    return float(np.max(np.abs(op.matrix @ op.matrix - op.matrix)))


def is_repeatable(op: ClassicalOperation, tol: float = REPEATABLE_TOL) -> bool:
    """Whether applying the operation twice equals applying it once.

    Matrix equality of J@J and J is equivalent to equality on all
    substates, by linearity.
    """
    return repeatable_deviation(op) <= tol


def observable_distribution(s: ClassicalSubstate, obs: Observable) -> DistributionTable:
    """Outcome distribution of an observable in a state."""
    _check_dims(s, obs)
    _require_state(s, "s")
    return DistributionTable(
        [obs.outcomes], [state_eval(s, obs[x]) for x in obs.outcomes]
    )


def instrument_distribution(s: ClassicalSubstate, instrument: Instrument) -> DistributionTable:
    """Outcome distribution of an instrument in a state: outcome x occurs
    with the probability that its operation occurs."""
    _check_dims(s, instrument)
    _require_state(s, "s")
    return DistributionTable(
        [instrument.outcomes],
        [apply_operation(instrument[x], s).total() for x in instrument.outcomes],
    )
