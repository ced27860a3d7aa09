"""Subpackage for the core functionality of steerdistil.

This subpackage holds the assemblage types, the max-relative entropy, the
single Kraus local filters and the SEO ordering with its witness search. It
only depends on numpy and scipy.
"""
from steerdistil.core.assemblage import (
    BipartiteState,
    MeasurementAssemblage,
    StateAssemblage,
    Violation,
    assemblage_from_seo,
    compute_seo,
    reduced_state,
    seo_inducible_assemblage,
    steer_from_state,
    validate_measurement_assemblage,
    validate_state_assemblage,
)
from steerdistil.core.filters import (
    FilterKraus,
    FilterOutcome,
    apply_filter,
    max_success_probability,
    synthesize_filter,
)
from steerdistil.core.helper import DEFAULT_TOLERANCES, AssemblageKind, Tolerances
from steerdistil.core.maxrelent import dmax, lambda_opt
from steerdistil.core.ordering import (
    EquivalenceStatus,
    EquivalenceVerdict,
    OrderVerdict,
    OrderWitness,
    RejectionReason,
    SearchConfig,
    VerdictStatus,
    WitnessRejection,
    compose_witnesses,
    is_reversible,
    search_order_witness,
    seo_equivalent,
    verify_order_witness,
    witness_from_filter,
)

__all__ = [
    "AssemblageKind",
    "BipartiteState",
    "DEFAULT_TOLERANCES",
    "EquivalenceStatus",
    "EquivalenceVerdict",
    "FilterKraus",
    "FilterOutcome",
    "MeasurementAssemblage",
    "OrderVerdict",
    "OrderWitness",
    "RejectionReason",
    "SearchConfig",
    "StateAssemblage",
    "Tolerances",
    "VerdictStatus",
    "Violation",
    "WitnessRejection",
    "apply_filter",
    "assemblage_from_seo",
    "compose_witnesses",
    "compute_seo",
    "dmax",
    "is_reversible",
    "lambda_opt",
    "max_success_probability",
    "reduced_state",
    "search_order_witness",
    "seo_equivalent",
    "seo_inducible_assemblage",
    "steer_from_state",
    "synthesize_filter",
    "validate_measurement_assemblage",
    "validate_state_assemblage",
    "verify_order_witness",
    "witness_from_filter",
]
