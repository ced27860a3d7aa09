"""Max-relative entropy between density operators.

D_max(η‖ρ) = log₂ min{λ ≥ 0 | η ≤ λρ}, and +∞ if supp(η) ⊄ supp(ρ).
Infinite values are represented by `math.inf`.
"""
from __future__ import annotations

import math

import numpy as np

from steerdistil.core import linalg
from steerdistil.core.assemblage import require_density
from steerdistil.core.helper import DEFAULT_TOLERANCES, Operator, Tolerances


def dmax(
    eta: Operator,
    rho: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Max-relative entropy D_max(η‖ρ) in bits.

    Args:
        eta: Density operator η.
        rho: Density operator ρ.
        tolerances: Numerical tolerances.

    Returns:
        log₂ λ_max(√ρ⁻¹ η √ρ⁻¹), or `math.inf` if the support of η is not
        contained in the support of ρ.

    Raises:
        NegativeOperatorError: If one of the operators is not PSD.
        NonUnitTraceError: If one of the operators does not have unit trace.
    """
    eta = require_density(eta, tolerances=tolerances)
    rho = require_density(rho, tolerances=tolerances)
    deviation = linalg.support_inclusion_deviation(eta, rho, tolerances=tolerances)
    if deviation > tolerances.support_inclusion:
        return math.inf
    inverse_root = linalg.sqrt_pinv(rho, tolerances=tolerances)
    sandwiched = inverse_root @ eta @ inverse_root
    sandwiched = (sandwiched + linalg.dagger(sandwiched)) / 2
    largest = float(np.linalg.eigvalsh(sandwiched)[-1])
    return math.log2(largest)


def lambda_opt(
    rho_target: Operator,
    rho_transformed: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> float:
    """Smallest λ with ρ_target ≤ λ·ρ_transformed, i.e. 2^D_max.

    Finite results are at least one up to rounding, because both operators
    have unit trace.

    Raises:
        NegativeOperatorError: If one of the operators is not PSD.
        NonUnitTraceError: If one of the operators does not have unit trace.
    """
    value = dmax(rho_target, rho_transformed, tolerances=tolerances)
    return math.inf if math.isinf(value) else 2.0**value
