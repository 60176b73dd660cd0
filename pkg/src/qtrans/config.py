"""Shared numeric defaults.

Tolerances are calibrated for double precision arithmetic at small
dimensions; ``DEFAULT_TOL`` is used for construction-time validation and
can be widened per call.  ``QTRANS_TOL`` (read by the CLI) overrides the
default without touching library call sites.
"""

DEFAULT_TOL = 1e-9

# Equality threshold for idempotence checks (J composed with itself vs. J).
REPEATABLE_TOL = 1e-8

# Hilbert-space dimensions above this are rejected: the dense algorithms
# here are validated only at desk scale.
MAX_HILBERT_DIM = 16

DEFAULT_SEED = 0
DEFAULT_SHOTS = 100_000

# Statistical acceptance threshold for sampled-vs-analytic comparisons.
DEFAULT_Z_MAX = 5.0
