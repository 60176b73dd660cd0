"""Finite-dimensional complex Hermitian linear algebra.

Numeric substrate for the quantum model: effects (operators between the
zero and identity operators), density operators, pure states, operator
square roots, and validation reports.  All matrices are dense complex
arrays; the Hermitian eigendecomposition is the single spectral
primitive.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL, MAX_HILBERT_DIM
from .errors import DimensionMismatchError, ValidationError

__all__ = [
    "QEffect",
    "DensityOperator",
    "PureState",
    "ValidationReport",
    "hermitian_deviation",
    "hermitian_eig",
    "hermitian_sqrt",
    "born",
    "pure_density",
    "validate_operator",
]


def as_complex_matrix(matrix, *, max_dim: int = MAX_HILBERT_DIM) -> np.ndarray:
    """Coerce to a finite square complex matrix within the dimension bound."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise ValidationError(f"expected a square matrix, got shape {matrix.shape}")
    if matrix.shape[0] > max_dim:
        raise ValidationError(
            f"dimension {matrix.shape[0]} exceeds the validated bound {max_dim}"
        )
    if not np.all(np.isfinite(matrix.real)) or not np.all(np.isfinite(matrix.imag)):
        raise ValidationError("matrix entries must be finite")
    return matrix


def hermitian_deviation(matrix: np.ndarray) -> float:
    """Max-entry distance from the adjoint."""
    return float(np.max(np.abs(matrix - matrix.conj().T)))


def hermitian_eig(matrix: np.ndarray, *, tol: float = DEFAULT_TOL):
    """Eigendecomposition of a Hermitian matrix (ascending eigenvalues).

    Returns ``(eigenvalues, eigenvectors)`` with real eigenvalues and
    unitary eigenvector columns; rejects non-Hermitian input.
    """
    matrix = as_complex_matrix(matrix)
    dev = hermitian_deviation(matrix)
    if dev > tol:
        raise ValidationError(f"matrix is not Hermitian (deviation {dev:.3e})")
    return np.linalg.eigh(matrix)


def hermitian_sqrt(matrix, *, tol: float = DEFAULT_TOL) -> np.ndarray:
    """The positive-semidefinite square root of a PSD Hermitian matrix.

    Eigenvalues in ``[-tol, 0)`` are treated as numerical drift and
    clamped to zero; anything more negative is a genuine violation and
    raises.
    """
    if isinstance(matrix, QEffect):
        matrix = matrix.matrix
    eigvals, eigvecs = hermitian_eig(matrix, tol=tol)
    if eigvals[0] < -tol:
        raise ValidationError(f"matrix is not PSD (eigenvalue {eigvals[0]:.3e})")
    roots = np.sqrt(np.clip(eigvals, 0.0, None))
    out = (eigvecs * roots) @ eigvecs.conj().T
    return (out + out.conj().T) / 2.0


def born(rho, effect, *, tol: float = DEFAULT_TOL) -> float:
    """Occurrence probability of an effect in a state: the real part of
    ``tr(rho A)``.

    The trace of a product of Hermitian PSD factors is real; an imaginary
    part above ``tol`` signals invalid operands and raises.
    """
    rho_m = rho.matrix if isinstance(rho, (DensityOperator, QEffect)) else np.asarray(rho)
    if isinstance(rho, PureState):
        rho_m = np.outer(rho.vector, rho.vector.conj())
    a_m = effect.matrix if isinstance(effect, QEffect) else np.asarray(effect)
    if rho_m.shape != a_m.shape:
        raise DimensionMismatchError(f"shapes {rho_m.shape} and {a_m.shape} differ")
    value = np.trace(rho_m @ a_m)
    if abs(value.imag) > tol:
        raise ValidationError(f"trace has imaginary part {value.imag:.3e}")
    return float(value.real)


class QEffect:
    """A Hermitian operator with spectrum inside [0, 1]."""

    def __init__(self, matrix, *, tol: float = DEFAULT_TOL):
        matrix = as_complex_matrix(matrix)
        dev = hermitian_deviation(matrix)
        if dev > tol:
            raise ValidationError(f"effect is not Hermitian (deviation {dev:.3e})")
        eigvals = np.linalg.eigvalsh(matrix)
        if eigvals[0] < -tol or eigvals[-1] > 1.0 + tol:
            raise ValidationError(
                f"effect spectrum [{eigvals[0]:.6g}, {eigvals[-1]:.6g}] escapes [0,1]"
            )
        matrix.flags.writeable = False
        self.matrix = matrix
        self.dim = matrix.shape[0]

    @classmethod
    def identity(cls, dim: int) -> "QEffect":
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def zero(cls, dim: int) -> "QEffect":
        return cls(np.zeros((dim, dim), dtype=complex))

    def complement(self) -> "QEffect":
        return QEffect(np.eye(self.dim) - self.matrix)

    def sqrt(self) -> np.ndarray:
        return hermitian_sqrt(self.matrix)

    def __repr__(self) -> str:
        return f"QEffect(dim={self.dim})"


class DensityOperator:
    """A Hermitian positive-semidefinite operator of unit trace."""

    def __init__(self, matrix, *, tol: float = DEFAULT_TOL):
        matrix = as_complex_matrix(matrix)
        dev = hermitian_deviation(matrix)
        if dev > tol:
            raise ValidationError(f"density operator is not Hermitian (deviation {dev:.3e})")
        eigvals = np.linalg.eigvalsh(matrix)
        if eigvals[0] < -tol:
            raise ValidationError(f"density operator has eigenvalue {eigvals[0]:.3e}")
        trace = np.trace(matrix).real
        if abs(trace - 1.0) > tol:
            raise ValidationError(f"density operator trace {trace:.9g} is not 1")
        matrix.flags.writeable = False
        self.matrix = matrix
        self.dim = matrix.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim, dtype=complex) / dim)

    def __repr__(self) -> str:
        return f"DensityOperator(dim={self.dim})"


class PureState:
    """A unit vector; the rank-one density operator it induces represents
    the same state."""

    def __init__(self, vector: Sequence[complex], *, tol: float = DEFAULT_TOL):
        vector = np.atleast_1d(np.asarray(vector, dtype=complex))
        if vector.ndim != 1 or vector.size == 0:
            raise ValidationError("pure state must be a nonempty vector")
        if vector.size > MAX_HILBERT_DIM:
            raise ValidationError(
                f"dimension {vector.size} exceeds the validated bound {MAX_HILBERT_DIM}"
            )
        norm = float(np.linalg.norm(vector))
        if abs(norm - 1.0) > tol:
            raise ValidationError(f"pure state norm {norm:.9g} is not 1")
        vector.flags.writeable = False
        self.vector = vector
        self.dim = vector.size

    @classmethod
    def basis(cls, dim: int, index: int) -> "PureState":
        v = np.zeros(dim, dtype=complex)
        v[index] = 1.0
        return cls(v)

    def overlap(self, other: "PureState") -> complex:
        """Inner product with another pure state."""
        if self.dim != other.dim:
            raise DimensionMismatchError(f"dims {self.dim} and {other.dim} differ")
        return complex(np.vdot(self.vector, other.vector))

    def density(self) -> DensityOperator:
        return pure_density(self)

    def __repr__(self) -> str:
        return f"PureState(dim={self.dim})"


def pure_density(psi: PureState) -> DensityOperator:
    """Rank-one density operator of a unit vector (outer product)."""
    return DensityOperator(np.outer(psi.vector, psi.vector.conj()))


@dataclass
class ValidationReport:
    """Measured deviations of a matrix from an operator class.

    ``passed`` summarizes the per-kind thresholds; the raw numbers stay
    available so callers can report how far off an object is.
    """

    kind: str
    dim: int
    hermitian_dev: float
    min_eigenvalue: float
    max_eigenvalue: float
    trace_real: float
    trace_imag: float
    passed: bool
    failures: list[str] = field(default_factory=list)

    def to_jsonable(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "hermitian_dev": self.hermitian_dev,
            "min_eigenvalue": self.min_eigenvalue,
            "max_eigenvalue": self.max_eigenvalue,
            "trace_real": self.trace_real,
            "trace_imag": self.trace_imag,
            "passed": self.passed,
            "failures": list(self.failures),
        }


def validate_operator(matrix, kind: str, *, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Report whether a matrix qualifies as an effect, a density
    operator, or a PSD matrix, with the measured deviations.

    Never raises for value violations; structural problems (non-square,
    oversized, non-finite) still raise.
    """
    if kind not in ("effect", "density", "psd"):
        raise ValidationError(f"unknown operator kind {kind!r}")
    matrix = as_complex_matrix(matrix)
    herm_dev = hermitian_deviation(matrix)
    sym = (matrix + matrix.conj().T) / 2.0
    eigvals = np.linalg.eigvalsh(sym)
    trace = complex(np.trace(matrix))

    failures = []
    if herm_dev > tol:
        failures.append(f"not Hermitian: deviation {herm_dev:.3e}")
    if eigvals[0] < -tol:
        failures.append(f"not PSD: eigenvalue {eigvals[0]:.6g}")
    if kind == "effect" and eigvals[-1] > 1.0 + tol:
        failures.append(f"exceeds identity: eigenvalue {eigvals[-1]:.6g}")
    if kind == "density" and abs(trace.real - 1.0) > tol:
        failures.append(f"trace {trace.real:.9g} is not 1")
    if abs(trace.imag) > tol:
        failures.append(f"trace has imaginary part {trace.imag:.3e}")

    return ValidationReport(
        kind=kind,
        dim=matrix.shape[0],
        hermitian_dev=herm_dev,
        min_eigenvalue=float(eigvals[0]),
        max_eigenvalue=float(eigvals[-1]),
        trace_real=trace.real,
        trace_imag=trace.imag,
        passed=not failures,
        failures=failures,
    )
