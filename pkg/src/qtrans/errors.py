"""Exception types shared by all qtrans modules."""


class QtransError(ValueError):
    """Base class for every error raised by qtrans."""


class DimensionMismatchError(QtransError):
    """Objects of incompatible dimension were combined."""


class ValidationError(QtransError):
    """An object violates its defining constraints beyond tolerance."""


class NormalizationOfZeroError(QtransError):
    """Attempted to normalize the zero substate (total weight below tolerance)."""


class TransitionUndefinedError(QtransError):
    """The operation annihilates the state, so the updated state and the
    transition probability do not exist."""


class ScenarioError(QtransError):
    """A scenario file is structurally valid but semantically wrong
    (unresolved references, invalid objects, wrong shapes)."""


class ScenarioParseError(QtransError):
    """A scenario file could not be read or parsed at all."""
