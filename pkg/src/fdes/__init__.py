"""Fuzzy discrete event systems: modelling, diagnosers, diagnosability.

The package models automata whose states are possibility vectors and whose
events are possibility matrices composed by max-min, with fuzzy observability
and failure degrees on events. It builds observability-based diagnosers with
respect to a reference event and decides per-type diagnosability both through
the indeterminate-cycle condition and through a bounded definitional oracle.
"""

from .diagnoser import (
    Classification,
    CycleWitness,
    Diagnoser,
    DiagnoserState,
    build_diagnoser,
    classify,
    diagnoser_step,
    find_indeterminate_cycle,
    label_text,
    observe,
    propagate_label,
    sigma_event_set,
    thresholds_for,
    to_dot,
)
from .errors import (
    AssumptionError,
    FdesError,
    InputError,
    ModelError,
    ParseError,
)
from .model import (
    FdesModel,
    FuzzyEvent,
    SilentRunStatus,
    ValidationReport,
    join_profiles,
    load_model,
    parse_model,
)
from .possibility import (
    Degree,
    EventMatrix,
    StateVector,
    degree_max,
    degree_min,
    max_min_compose,
)
from .verdict import (
    OracleResult,
    SigmaVerdict,
    VerdictReport,
    check_type,
    check_wrt,
    failure_event_set,
    oracle_check,
)

__all__ = [
    "AssumptionError",
    "Classification",
    "CycleWitness",
    "Degree",
    "Diagnoser",
    "DiagnoserState",
    "EventMatrix",
    "FdesError",
    "FdesModel",
    "FuzzyEvent",
    "InputError",
    "ModelError",
    "OracleResult",
    "ParseError",
    "SigmaVerdict",
    "SilentRunStatus",
    "StateVector",
    "ValidationReport",
    "VerdictReport",
    "build_diagnoser",
    "check_type",
    "check_wrt",
    "classify",
    "degree_max",
    "degree_min",
    "diagnoser_step",
    "failure_event_set",
    "find_indeterminate_cycle",
    "join_profiles",
    "label_text",
    "load_model",
    "max_min_compose",
    "observe",
    "oracle_check",
    "parse_model",
    "propagate_label",
    "sigma_event_set",
    "thresholds_for",
    "to_dot",
]
