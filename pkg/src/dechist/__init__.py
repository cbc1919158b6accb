"""Numerical checks of decoherence for histories built from a fixed projective partition."""

from .conditions import (
    ConditionReport,
    FullReport,
    RecurrenceResult,
    check_all_state_decoherence,
    check_classicality_preservation,
    check_commutativity,
    check_partition_state_decoherence,
    check_sandwich,
    check_single_iteration,
    find_recurrence_time,
    full_report,
)
from .generators import block_preserving_unitary, haar_unitary, perturb_unitary, random_density, random_partition
from .histories import (
    DecoherenceMatrix,
    EnumerationCapError,
    check_medium_decoherence,
    class_operator,
    coarse_grain,
    decoherence_functional,
    decoherence_matrix,
    history_probabilities,
)
from .operators import commutator, conjugate_by_power, operator_norm, trace_norm, validate
from .partition import (
    PartitionError,
    ProjectivePartition,
    classical_spanning_set,
    dephase,
    grain_type,
    is_classical_state,
    partition_states,
    validate_partition,
)

__version__ = "0.1.0"
