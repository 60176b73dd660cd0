"""Transition probabilities between effects and between states, relative
to operations and instruments, on two concrete models: a finite classical
effect algebra and finite-dimensional quantum mechanics.
"""

from .errors import (
    QtransError,
    DimensionMismatchError,
    ValidationError,
    NormalizationOfZeroError,
    TransitionUndefinedError,
)
from .tables import DistributionTable
from .classical import (
    ClassicalEffect,
    ClassicalSubstate,
    ClassicalOperation,
    Observable,
    Instrument,
    effect_oplus,
    state_eval,
    substate_normalize,
    apply_operation,
    compose_operations,
    measured_effect,
    transition_prob_effect,
    transition_prob_state,
    joint_effect_distribution,
    instrument_joint_distribution,
    instrument_state_transition,
    holevo_pure,
    holevo_mixed,
    holevo_instrument,
    is_repeatable,
    observable_distribution,
    instrument_distribution,
)
from .hilbert import (
    QEffect,
    DensityOperator,
    PureState,
    ValidationReport,
    hermitian_eig,
    hermitian_sqrt,
    born,
    pure_density,
    validate_operator,
)
from .quantum import (
    KrausOperation,
    LudersOperation,
    QHolevoOperation,
    QObservable,
    QInstrument,
    to_kraus,
    q_apply,
    q_measured_effect,
    q_update_state,
    q_compose,
    q_transition_effect,
    q_transition_state,
    transition_path,
    luders_instrument,
    q_is_repeatable,
    channel_deviation,
    q_observable_distribution,
    q_instrument_distribution,
    q_joint_effect_distribution,
    q_instrument_joint_distribution,
    q_instrument_state_transition,
)
from .oracle import (
    RNG_ID,
    SampleReport,
    CheckReport,
    sample_effect,
    sample_transition_effect,
    sample_transition_state,
    sample_instrument,
    max_cell_z,
    enumerate_check,
    convexity_probe,
)

__version__ = "0.1.0"
