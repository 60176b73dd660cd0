"""Quantum operations and instruments with their transition probabilities.

Operations come in three constructions: a general Kraus family, the
square-root sandwich of an effect (Lüders), and the measure-and-reprepare
map (Holevo).  Closed-form transition probabilities are used for the
Lüders and Holevo shapes, and every form can be lowered to Kraus
operators for composition and cross-checking.
"""

from __future__ import annotations

from typing import Mapping, Union

import numpy as np

from .config import DEFAULT_TOL, REPEATABLE_TOL
from .errors import DimensionMismatchError, TransitionUndefinedError, ValidationError
from .hilbert import (
    DensityOperator,
    PureState,
    QEffect,
    as_complex_matrix,
    hermitian_eig,
    hermitian_sqrt,
)
from .tables import DistributionTable

__all__ = [
    "KrausOperation",
    "LudersOperation",
    "QHolevoOperation",
    "QuantumOperation",
    "QObservable",
    "QInstrument",
    "to_kraus",
    "q_apply",
    "q_measured_effect",
    "q_update_state",
    "q_compose",
    "q_transition_effect",
    "q_transition_state",
    "transition_path",
    "luders_instrument",
    "q_is_repeatable",
    "q_repeatable_deviation",
    "channel_deviation",
    "spanning_density_matrices",
    "q_observable_distribution",
    "q_instrument_distribution",
    "q_joint_effect_distribution",
    "q_instrument_joint_distribution",
    "q_instrument_state_transition",
]


class KrausOperation:
    """A quantum operation given by a nonempty family of Kraus operators.

    Trace-nonincreasing by the constraint that the Kraus products sum to
    at most the identity; summing exactly to the identity is the channel
    case.  Complete positivity holds by construction.
    """

    def __init__(self, kraus, *, tol: float = DEFAULT_TOL):
        kraus = [as_complex_matrix(k) for k in kraus]
        if not kraus:
            raise ValidationError("at least one Kraus operator is required")
        dims = {k.shape[0] for k in kraus}
        if len(dims) != 1:
            raise DimensionMismatchError(f"Kraus operators have mixed dims {sorted(dims)}")
        gram = sum(k.conj().T @ k for k in kraus)
        top = float(np.linalg.eigvalsh((gram + gram.conj().T) / 2.0)[-1])
        if top > 1.0 + tol:
            raise ValidationError(
                f"Kraus products sum beyond the identity (top eigenvalue {top:.9g})"
            )
        for k in kraus:
            k.flags.writeable = False
        self.kraus = tuple(kraus)
        self.dim = dims.pop()
        self._tol = tol

    @classmethod
    def identity(cls, dim: int) -> "KrausOperation":
        return cls([np.eye(dim, dtype=complex)])

    @property
    def is_channel(self) -> bool:
        return channel_deviation(self) <= self._tol

    def __repr__(self) -> str:
        return f"KrausOperation(dim={self.dim}, n_kraus={len(self.kraus)})"


class LudersOperation:
    """The square-root state update of an effect: rho is sandwiched
    between the two halves of the effect's square root."""

    def __init__(self, effect: QEffect, *, tol: float = DEFAULT_TOL):
        if not isinstance(effect, QEffect):
            effect = QEffect(effect, tol=tol)
        self.effect = effect
        self.root = hermitian_sqrt(effect.matrix, tol=tol)
        self.root.flags.writeable = False
        self.dim = effect.dim

    def __repr__(self) -> str:
        return f"LudersOperation(dim={self.dim})"


class QHolevoOperation:
    """Measure an effect, discard the outcome state, and prepare a fixed
    target state scaled by the occurrence probability."""

    def __init__(self, effect: QEffect, alpha: DensityOperator, *, tol: float = DEFAULT_TOL):
        if not isinstance(effect, QEffect):
            effect = QEffect(effect, tol=tol)
        if not isinstance(alpha, DensityOperator):
            alpha = DensityOperator(alpha, tol=tol)
        if effect.dim != alpha.dim:
            raise DimensionMismatchError(f"dims {effect.dim} and {alpha.dim} differ")
        self.effect = effect
        self.alpha = alpha
        self.dim = effect.dim

    def __repr__(self) -> str:
        return f"QHolevoOperation(dim={self.dim})"


QuantumOperation = Union[KrausOperation, LudersOperation, QHolevoOperation]


class QObservable:
    """A finite family of effects summing to the identity."""

    def __init__(self, effects: Mapping[str, QEffect], *, tol: float = DEFAULT_TOL):
        if not effects:
            raise ValidationError("observable needs at least one outcome")
        self.outcomes: tuple[str, ...] = tuple(sorted(str(x) for x in effects))
        self.effects = {str(x): e for x, e in effects.items()}
        dims = {e.dim for e in self.effects.values()}
        if len(dims) != 1:
            raise DimensionMismatchError(f"observable effects have mixed dims {sorted(dims)}")
        self.dim = dims.pop()
        total = sum(self.effects[x].matrix for x in self.outcomes)
        dev = float(np.max(np.abs(total - np.eye(self.dim))))
        if dev > tol:
            raise ValidationError(f"observable effects miss the identity by {dev:.3e}")

    def __getitem__(self, outcome: str) -> QEffect:
        return self.effects[outcome]

    def __repr__(self) -> str:
        return f"QObservable(outcomes={list(self.outcomes)}, dim={self.dim})"


class QInstrument:
    """A finite family of quantum operations summing to a channel."""

    def __init__(self, operations: Mapping[str, QuantumOperation], *, tol: float = DEFAULT_TOL):
        if not operations:
            raise ValidationError("instrument needs at least one outcome")
        self.outcomes: tuple[str, ...] = tuple(sorted(str(x) for x in operations))
        self.operations = {str(x): op for x, op in operations.items()}
        dims = {op.dim for op in self.operations.values()}
        if len(dims) != 1:
            raise DimensionMismatchError(f"instrument operations have mixed dims {sorted(dims)}")
        self.dim = dims.pop()
        total = sum(_measured_matrix(self.operations[x]) for x in self.outcomes)
        dev = float(np.max(np.abs(total - np.eye(self.dim))))
        if dev > tol:
            raise ValidationError(f"instrument operations sum misses a channel by {dev:.3e}")

    def __getitem__(self, outcome: str) -> QuantumOperation:
        return self.operations[outcome]

    def apply_total(self, rho) -> np.ndarray:
        """Apply the summed channel."""
        return sum(q_apply(self.operations[x], rho) for x in self.outcomes)

    def measured_observable(self) -> QObservable:
        """The observable formed by the outcome-wise measured effects."""
        return QObservable({x: q_measured_effect(self.operations[x]) for x in self.outcomes})

    def __repr__(self) -> str:
        return f"QInstrument(outcomes={list(self.outcomes)}, dim={self.dim})"


def _as_matrix(rho) -> np.ndarray:
    """Accept a density operator, a pure state, or a raw (possibly
    subnormalized) PSD matrix and return the matrix."""
    if isinstance(rho, DensityOperator):
        return rho.matrix
    if isinstance(rho, PureState):
        return np.outer(rho.vector, rho.vector.conj())
    return as_complex_matrix(rho)


def _measured_matrix(op: QuantumOperation) -> np.ndarray:
    if isinstance(op, KrausOperation):
        gram = sum(k.conj().T @ k for k in op.kraus)
        return (gram + gram.conj().T) / 2.0
    if isinstance(op, LudersOperation):
        return np.array(op.effect.matrix)
    if isinstance(op, QHolevoOperation):
        return np.array(op.effect.matrix)
    raise TypeError(f"not a quantum operation: {op!r}")


def _real_trace(matrix: np.ndarray) -> float:
    return float(np.trace(matrix).real)


def to_kraus(op: QuantumOperation, *, tol: float = DEFAULT_TOL) -> KrausOperation:
    """Lower any operation to Kraus form.

    Lüders becomes the single operator given by the effect's square root.
    The Holevo map (effect a, target alpha) uses the spectral
    decompositions of both: one operator sqrt(lam_m mu_k) |e_m><f_k| per
    pair of nonzero eigenvalues.
    """
    if isinstance(op, KrausOperation):
        return op
    if isinstance(op, LudersOperation):
        return KrausOperation([op.root], tol=tol)
    if isinstance(op, QHolevoOperation):
        lam, e_vecs = hermitian_eig(op.alpha.matrix, tol=tol)
        mu, f_vecs = hermitian_eig(op.effect.matrix, tol=tol)
        kraus = []
        for m in range(op.dim):
            if lam[m] <= tol:
                continue
            for k in range(op.dim):
                if mu[k] <= tol:
                    continue
                kraus.append(
                    np.sqrt(lam[m] * mu[k]) * np.outer(e_vecs[:, m], f_vecs[:, k].conj())
                )
        if not kraus:  # zero effect: the zero operation
            kraus = [np.zeros((op.dim, op.dim), dtype=complex)]
        return KrausOperation(kraus, tol=tol)
    raise TypeError(f"not a quantum operation: {op!r}")


def q_apply(op: QuantumOperation, rho) -> np.ndarray:
    """Apply an operation to a state (or subnormalized PSD matrix).

    The result is PSD with trace at most the input trace.
    """
    rho_m = _as_matrix(rho)
    if rho_m.shape[0] != op.dim:
        raise DimensionMismatchError(f"state dim {rho_m.shape[0]} vs operation dim {op.dim}")
    if isinstance(op, KrausOperation):
        return sum(k @ rho_m @ k.conj().T for k in op.kraus)
    if isinstance(op, LudersOperation):
        return op.root @ rho_m @ op.root
    if isinstance(op, QHolevoOperation):
        return _real_trace(rho_m @ op.effect.matrix) * op.alpha.matrix
    raise TypeError(f"not a quantum operation: {op!r}")


def q_measured_effect(op: QuantumOperation) -> QEffect:
    """The effect an operation measures: its occurrence probability in
    any state equals the output trace."""
    return QEffect(_measured_matrix(op))


def q_update_state(op: QuantumOperation, rho, *, tol: float = DEFAULT_TOL) -> DensityOperator:
    """Normalized post-measurement state; undefined when the operation
    annihilates the input."""
    out = q_apply(op, rho)
    trace = _real_trace(out)
    if trace < tol:
        raise TransitionUndefinedError(
            f"operation leaves trace {trace:.3g}; updated state undefined"
        )
    out = out / trace
    return DensityOperator((out + out.conj().T) / 2.0)


def q_compose(first: QuantumOperation, second: QuantumOperation) -> KrausOperation:
    """Operation applying ``second`` then ``first``, in Kraus form (all
    pairwise products of the two Kraus families)."""
    if first.dim != second.dim:
        raise DimensionMismatchError(f"dims {first.dim} and {second.dim} differ")
    k1 = to_kraus(first).kraus
    k2 = to_kraus(second).kraus
    return KrausOperation([a @ b for a in k1 for b in k2])


def transition_path(rho, op: QuantumOperation) -> str:
    """Which formula :func:`q_transition_effect` uses for these inputs."""
    if isinstance(op, LudersOperation):
        return "pure" if isinstance(rho, PureState) else "luders"
    if isinstance(op, QHolevoOperation):
        return "holevo"
    return "kraus"


def q_transition_effect(
    rho, op: QuantumOperation, effect_a: QEffect, effect_b: QEffect, *, tol: float = DEFAULT_TOL
) -> float:
    """Probability that ``effect_a`` occurs in ``rho`` times the
    probability that ``effect_b`` occurs in the updated state.

    Dispatches to the closed form matching the operation (and, for a
    Lüders operation on a pure state, to the inner-product form); all
    paths agree within numerical tolerance.
    """
    a_m = effect_a.matrix if isinstance(effect_a, QEffect) else as_complex_matrix(effect_a)
    b_m = effect_b.matrix if isinstance(effect_b, QEffect) else as_complex_matrix(effect_b)
    path = transition_path(rho, op)

    if path == "pure":
        psi = rho.vector
        croot = op.root
        denom = float(np.vdot(psi, op.effect.matrix @ psi).real)
        if denom < tol:
            raise TransitionUndefinedError("effect annihilates the pure state")
        first = float(np.vdot(psi, a_m @ psi).real)
        second = float(np.vdot(psi, croot @ b_m @ croot @ psi).real)
        return first * second / denom

    rho_m = _as_matrix(rho)
    if rho_m.shape[0] != op.dim:
        raise DimensionMismatchError(f"state dim {rho_m.shape[0]} vs operation dim {op.dim}")
    first = _real_trace(rho_m @ a_m)

    if path == "luders":
        denom = _real_trace(rho_m @ op.effect.matrix)
        if denom < tol:
            raise TransitionUndefinedError("effect annihilates the state")
        sandwich = op.root @ rho_m @ op.root
        return first * _real_trace(sandwich @ b_m) / denom

    if path == "holevo":
        denom = _real_trace(rho_m @ op.effect.matrix)
        if denom < tol:
            raise TransitionUndefinedError("effect annihilates the state")
        return first * _real_trace(op.alpha.matrix @ b_m)

    gram = sum(k.conj().T @ k for k in op.kraus)
    denom = _real_trace(rho_m @ gram)
    if denom < tol:
        raise TransitionUndefinedError("operation annihilates the state")
    heisenberg_b = sum(k.conj().T @ b_m @ k for k in op.kraus)
    return first * _real_trace(rho_m @ heisenberg_b) / denom


def q_transition_state(op: QuantumOperation, rho1, rho2) -> float:
    """Probability the operation occurs in ``rho1`` times the probability
    its self-composition occurs in ``rho2``.

    Uses the closed forms for the Lüders and Holevo shapes and sequential
    application for general Kraus families.
    """
    rho1_m = _as_matrix(rho1)
    rho2_m = _as_matrix(rho2)
    if rho1_m.shape != rho2_m.shape or rho1_m.shape[0] != op.dim:
        raise DimensionMismatchError("state and operation dimensions differ")
    if isinstance(op, LudersOperation):
        c = op.effect.matrix
        return _real_trace(rho1_m @ c) * _real_trace(rho2_m @ (c @ c))
    if isinstance(op, QHolevoOperation):
        a = op.effect.matrix
        return (
            _real_trace(rho1_m @ a)
            * _real_trace(rho2_m @ a)
            * _real_trace(op.alpha.matrix @ a)
        )
    return _real_trace(q_apply(op, rho1_m)) * _real_trace(q_apply(op, q_apply(op, rho2_m)))


def luders_instrument(obs: QObservable) -> QInstrument:
    """The instrument that updates by the square-root sandwich of each
    outcome effect; it measures the observable it was built from."""
    return QInstrument({x: LudersOperation(obs[x]) for x in obs.outcomes})


def spanning_density_matrices(dim: int) -> list[np.ndarray]:
    """``dim**2`` density matrices whose real span is every Hermitian
    matrix, giving a finite certificate for operation equality."""
    out = []
    for i in range(dim):
        e = np.zeros((dim, dim), dtype=complex)
        e[i, i] = 1.0
        out.append(e)
    for i in range(dim):
        for j in range(i + 1, dim):
            plus = np.zeros(dim, dtype=complex)
            plus[i] = plus[j] = 1.0 / np.sqrt(2.0)
            out.append(np.outer(plus, plus.conj()))
            phase = np.zeros(dim, dtype=complex)
            phase[i] = 1.0 / np.sqrt(2.0)
            phase[j] = 1.0j / np.sqrt(2.0)
            out.append(np.outer(phase, phase.conj()))
    return out


def q_repeatable_deviation(op: QuantumOperation) -> float:
    """Largest max-entry distance between twice- and once-applied outputs
    over the spanning set of density matrices."""
    twice = q_compose(op, op)
    return max(
        float(np.max(np.abs(q_apply(twice, rho) - q_apply(op, rho))))
        for rho in spanning_density_matrices(op.dim)
    )


def q_is_repeatable(op: QuantumOperation, tol: float = REPEATABLE_TOL) -> bool:
    """Whether applying the operation twice equals applying it once,
    certified on a spanning set of density matrices (linearity extends
    the equality everywhere)."""
    return q_repeatable_deviation(op) <= tol


def channel_deviation(op: QuantumOperation) -> float:
    """Max-entry distance of the measured effect from the identity; zero
    exactly for channels."""
    return float(np.max(np.abs(_measured_matrix(op) - np.eye(op.dim))))


def _born_m(rho_m: np.ndarray, effect: QEffect) -> float:
    return float(np.trace(rho_m @ effect.matrix).real)


def q_observable_distribution(rho, obs: QObservable) -> DistributionTable:
    """Outcome distribution of an observable in a state."""
    rho_m = _as_matrix(rho)
    if rho_m.shape[0] != obs.dim:
        raise DimensionMismatchError(f"state dim {rho_m.shape[0]} vs observable dim {obs.dim}")
    return DistributionTable([obs.outcomes], [_born_m(rho_m, obs[x]) for x in obs.outcomes])


def q_instrument_distribution(rho, instrument: QInstrument) -> DistributionTable:
    """Outcome distribution of an instrument in a state."""
    rho_m = _as_matrix(rho)
    if rho_m.shape[0] != instrument.dim:
        raise DimensionMismatchError("state and instrument dimensions differ")
    return DistributionTable(
        [instrument.outcomes],
        [_real_trace(q_apply(instrument[x], rho_m)) for x in instrument.outcomes],
    )


def q_joint_effect_distribution(
    rho, op: QuantumOperation, obs_a: QObservable, obs_b: QObservable, *, tol: float = DEFAULT_TOL
) -> DistributionTable:
    """Joint outcome table of measuring ``obs_a`` first and ``obs_b``
    after the operation (transition probabilities entrywise)."""
    rho_m = _as_matrix(rho)
    if obs_a.dim != op.dim or obs_b.dim != op.dim or rho_m.shape[0] != op.dim:
        raise DimensionMismatchError("joint table inputs have mixed dimensions")
    out = q_apply(op, rho_m)
    denom = _real_trace(out)
    if denom < tol:
        raise TransitionUndefinedError("operation annihilates the state; joint table undefined")
    rows = np.array([_born_m(rho_m, obs_a[x]) for x in obs_a.outcomes])
    cols = np.array([_born_m(out, obs_b[y]) / denom for y in obs_b.outcomes])
    return DistributionTable([obs_a.outcomes, obs_b.outcomes], np.outer(rows, cols))


def q_instrument_joint_distribution(
    rho, instrument: QInstrument, obs_a: QObservable, obs_b: QObservable
) -> DistributionTable:
    """Three-way table over (instrument outcome, first observable
    outcome, second observable outcome); see the classical counterpart."""
    rho_m = _as_matrix(rho)
    if obs_a.dim != instrument.dim or obs_b.dim != instrument.dim:
        raise DimensionMismatchError("joint table inputs have mixed dimensions")
    a_vals = np.array([_born_m(rho_m, obs_a[x]) for x in obs_a.outcomes])
    entries = np.empty((len(instrument.outcomes), len(obs_a.outcomes), len(obs_b.outcomes)))
    for i, z in enumerate(instrument.outcomes):
        out = q_apply(instrument[z], rho_m)
        b_vals = np.array([_born_m(out, obs_b[y]) for y in obs_b.outcomes])
        entries[i] = np.outer(a_vals, b_vals)
    return DistributionTable([instrument.outcomes, obs_a.outcomes, obs_b.outcomes], entries)


def q_instrument_state_transition(
    instrument: QInstrument, rho1, rho2
) -> DistributionTable:
    """Outcome-pair transition table between two states relative to an
    instrument; totals one and its marginals are the per-state outcome
    probabilities."""
    rho1_m = _as_matrix(rho1)
    rho2_m = _as_matrix(rho2)
    if rho1_m.shape[0] != instrument.dim or rho2_m.shape[0] != instrument.dim:
        raise DimensionMismatchError("state and instrument dimensions differ")
    pushed = instrument.apply_total(rho2_m)
    first = np.array(
        [_real_trace(q_apply(instrument[x], rho1_m)) for x in instrument.outcomes]
    )
    second = np.array(
        [_real_trace(q_apply(instrument[y], pushed)) for y in instrument.outcomes]
    )
    return DistributionTable([instrument.outcomes, instrument.outcomes], np.outer(first, second))
