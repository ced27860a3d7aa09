"""Subpackage for membership tests, robustness measures and free operations.

All programs are solved with `steerdistil.sdp`.
"""
from steerdistil.robustness.free_ops import (
    FreeOpSpec,
    apply_incompatibility_free_op,
    apply_steering_free_op,
    incompatibility_op_as_steering_op,
    lhs_from_jm_decomposition,
)
from steerdistil.robustness.induced import (
    InducedIncompatibility,
    InducedSearchConfig,
    steering_induced_incompatibility,
)
from steerdistil.robustness.measures import (
    DistillationGap,
    MembershipResult,
    RobustnessResult,
    consistent_steering_robustness,
    convexity_gap,
    distillation_gap,
    incompatibility_robustness,
    jm_membership,
    lhs_membership,
    robustness_with_noise_model,
    steering_robustness,
)
from steerdistil.robustness.noise import (
    LinearConstraint,
    NoiseKind,
    NoiseModel,
    is_seo_included,
)
from steerdistil.robustness.strategies import (
    DeterministicStrategySet,
    enumerate_deterministic_strategies,
)

__all__ = [
    "DeterministicStrategySet",
    "DistillationGap",
    "FreeOpSpec",
    "InducedIncompatibility",
    "InducedSearchConfig",
    "LinearConstraint",
    "MembershipResult",
    "NoiseKind",
    "NoiseModel",
    "RobustnessResult",
    "apply_incompatibility_free_op",
    "apply_steering_free_op",
    "consistent_steering_robustness",
    "convexity_gap",
    "distillation_gap",
    "enumerate_deterministic_strategies",
    "incompatibility_op_as_steering_op",
    "incompatibility_robustness",
    "is_seo_included",
    "jm_membership",
    "lhs_from_jm_decomposition",
    "lhs_membership",
    "robustness_with_noise_model",
    "steering_induced_incompatibility",
    "steering_robustness",
]
