"""Probability tables over finite outcome spaces.

A :class:`DistributionTable` holds nonnegative reals indexed by one to
three axes of string outcome labels.  Labels are kept in sorted order so
that two tables built from the same data in different insertion orders
serialize identically.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .config import DEFAULT_TOL


class DistributionTable:
    """Nonnegative reals indexed by 1-3 finite outcome label axes.

    Entries are stored in a read-only numpy array whose axes follow the
    sorted label order.  The table does not itself require the total to
    be one; callers that promise a probability measure check it with
    :meth:`require_probability`.
    """

    def __init__(self, axes: Sequence[Iterable[str]], values, *, tol: float = DEFAULT_TOL):
        axes = tuple(tuple(str(label) for label in axis) for axis in axes)
        if not 1 <= len(axes) <= 3:
            raise ValidationError(f"expected 1-3 axes, got {len(axes)}")
        for axis in axes:
            if len(set(axis)) != len(axis):
                raise ValidationError(f"duplicate outcome labels in axis {axis}")
            if not axis:
                raise ValidationError("empty outcome axis")
        values = np.asarray(values, dtype=float)
        if values.shape != tuple(len(axis) for axis in axes):
            raise ValidationError(
                f"value shape {values.shape} does not match axes {tuple(map(len, axes))}"
            )
        if not np.all(np.isfinite(values)):
            raise ValidationError("table entries must be finite")
        if np.any(values < -tol):
            raise ValidationError(f"negative table entry (min {values.min():.3e})")

        # Canonicalize: sort each axis and permute values to match.
        order = [np.argsort(axis) for axis in axes]
        values = values[np.ix_(*order)]
        values = np.where(values < 0.0, 0.0, values)  # clip within-tol negatives
        values.flags.writeable = False
        self.axes: tuple[tuple[str, ...], ...] = tuple(
            tuple(np.asarray(axis, dtype=object)[perm]) for axis, perm in zip(axes, order)
        )
        self.values = values

    @classmethod
    def from_dict(cls, entries: Mapping, *, tol: float = DEFAULT_TOL) -> "DistributionTable":
        """Build a table from a mapping of label tuples (or single labels)
        to values."""
        keys = [k if isinstance(k, tuple) else (k,) for k in entries]
        if not keys:
            raise ValidationError("empty table")
        ndim = len(keys[0])
        axes = [sorted({k[i] for k in keys}) for i in range(ndim)]
        values = np.zeros([len(a) for a in axes])
        index = [{label: i for i, label in enumerate(axis)} for axis in axes]
        for key, value in zip(keys, entries.values()):
            values[tuple(ix[k] for ix, k in zip(index, key))] = value
        return cls(axes, values, tol=tol)

    @property
    def ndim(self) -> int:
        return len(self.axes)

    def __getitem__(self, key) -> float:
        if not isinstance(key, tuple):
            key = (key,)
        idx = tuple(self.axes[i].index(label) for i, label in enumerate(key))
        return float(self.values[idx])

    def total(self) -> float:
        return float(self.values.sum())

    def marginal(self, keep) -> "DistributionTable":
        """Sum out every axis except the ones in ``keep`` (an axis index or
        a tuple of indices)."""
        if isinstance(keep, int):
            keep = (keep,)
        keep = tuple(sorted(keep))
        if any(k < 0 or k >= self.ndim for k in keep) or not keep:
            raise ValidationError(f"invalid axes {keep} for a {self.ndim}-axis table")
        drop = tuple(i for i in range(self.ndim) if i not in keep)
        values = self.values.sum(axis=drop) if drop else self.values
        return DistributionTable([self.axes[k] for k in keep], values)

    def require_probability(self, *, tol: float = DEFAULT_TOL) -> "DistributionTable":
        """Assert the entries total one, which makes the table a finite
        probability measure."""
        if abs(self.total() - 1.0) > tol:
            raise ValidationError(f"table total {self.total()!r} is not 1 within {tol}")
        return self

    def max_abs_diff(self, other: "DistributionTable") -> float:
        if self.axes != other.axes:
            raise ValidationError("tables are indexed by different outcome labels")
        return float(np.max(np.abs(self.values - other.values)))

    def to_jsonable(self) -> dict:
        return {
            "axes": [list(axis) for axis in self.axes],
            "values": self.values.tolist(),
        }

    def __repr__(self) -> str:
        sizes = "x".join(str(len(a)) for a in self.axes)
        return f"DistributionTable({sizes}, total={self.total():.6g})"
