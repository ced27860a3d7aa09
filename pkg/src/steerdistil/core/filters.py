"""Single Kraus local filters on the trusted party.

A filter K with K†K ≤ I maps σ_{a|x} to Kσ_{a|x}K†/p on success, which
happens with probability p = tr(Kρ_σK†). Given a witness U of σ ≻_SEO τ the
filter

    L = λ_opt^(−1/2) √ρ_τ U √ρ_σ⁻¹,   λ_opt = 2^D_max(ρ_τ‖Uρ_σU†),

converts σ into τ with the optimal success probability for that witness.
"""
from __future__ import annotations

import logging
import typing as t
from dataclasses import dataclass

import numpy as np

from steerdistil.core import errors, linalg, ordering
from steerdistil.core.assemblage import StateAssemblage, reduced_state
from steerdistil.core.helper import (
    DEFAULT_TOLERANCES,
    Operator,
    Tolerances,
    as_operator,
    frozen,
)

logger = logging.getLogger(__name__)

# Relative headroom kept below one when L has to be renormalised.
_RENORMALISATION_MARGIN = 1e-12


@dataclass(frozen=True, eq=False)
class FilterKraus:
    """Kraus operator of a single Kraus filter.

    Use `FilterKraus.from_operator` to construct validated instances.

    Args:
        operator: The Kraus operator K.
        contraction_slack: Smallest eigenvalue of I − K†K.
    """

    operator: Operator
    contraction_slack: float

    @staticmethod
    def from_operator(
        operator: object,
        *,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> FilterKraus:
        """Validate and wrap a Kraus operator.

        Raises:
            DimensionMismatchError: If the operator is not square.
            ContractionViolationError: If K†K ≤ I is violated beyond the
                negativity floor.
        """
        try:
            matrix = as_operator(operator)
        except ValueError as e:
            raise errors.DimensionMismatchError(str(e)) from e
        gram = linalg.dagger(matrix) @ matrix
        slack_operator = np.eye(matrix.shape[0]) - (gram + linalg.dagger(gram)) / 2
        slack = float(np.linalg.eigvalsh(slack_operator)[0])
        if slack < -tolerances.negativity:
            msg = (
                "Filter operator is not a contraction: the smallest eigenvalue "
                f"of I - K†K is {slack:.3e}."
            )
            raise errors.ContractionViolationError(msg)
        return FilterKraus(frozen(matrix), slack)

    @staticmethod
    def identity(dim: int) -> FilterKraus:
        """The trivial filter K = I."""
        return FilterKraus(frozen(np.eye(dim)), 0.0)

    @staticmethod
    def projector(vectors: object) -> FilterKraus:
        """Projector onto the span of the given orthonormal columns."""
        basis = np.array(vectors, dtype=np.complex128)
        return FilterKraus.from_operator(basis @ linalg.dagger(basis))

    @property
    def dim(self) -> int:
        """Dimension the filter acts on."""
        return int(self.operator.shape[0])

    def compose(self, other: FilterKraus) -> FilterKraus:
        """Filter applying ``other`` first and then ``self``."""
        return FilterKraus.from_operator(self.operator @ other.operator)


@dataclass(frozen=True)
class FilterOutcome:
    """Result of a successful filter application.

    Args:
        output: Normalised post-selected assemblage.
        p_succ: Success probability tr(Kρ_σK†).
    """

    output: StateAssemblage
    p_succ: float


def _as_filter(
    kraus: t.Union[FilterKraus, Operator],
    tolerances: Tolerances,
) -> FilterKraus:
    if isinstance(kraus, FilterKraus):
        return kraus
    return FilterKraus.from_operator(kraus, tolerances=tolerances)


def apply_filter(
    sigma: StateAssemblage,
    kraus: t.Union[FilterKraus, Operator],
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> FilterOutcome:
    """Apply a filter and post-select on success.

    Args:
        sigma: Input assemblage.
        kraus: The filter, or a plain Kraus operator to be validated.
        tolerances: Numerical tolerances.

    Returns:
        The normalised output assemblage and the success probability.

    Raises:
        ContractionViolationError: If the Kraus operator is not a contraction.
        DimensionMismatchError: If the filter does not act on σ's space.
        VanishingSuccessProbabilityError: If the success probability does not
            exceed `Tolerances.success_probability`.
    """
    kraus = _as_filter(kraus, tolerances)
    if kraus.dim != sigma.dim:
        msg = f"Filter of dimension {kraus.dim} cannot act on dimension {sigma.dim}."
        raise errors.DimensionMismatchError(msg)
    operator = kraus.operator
    rho = reduced_state(sigma, tolerances=tolerances)
    p_succ = float(np.real(np.trace(operator @ rho @ linalg.dagger(operator))))
    if p_succ <= tolerances.success_probability:
        msg = f"Filter succeeds with probability {p_succ:.3e}."
        raise errors.VanishingSuccessProbabilityError(msg)
    elements = operator @ sigma.elements @ linalg.dagger(operator) / p_succ
    return FilterOutcome(
        StateAssemblage((elements + linalg.dagger(elements)) / 2),
        min(p_succ, 1.0),
    )


def synthesize_filter(
    sigma: StateAssemblage,
    tau: StateAssemblage,
    unitary: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> FilterKraus:
    """Build the filter L = λ_opt^(−1/2) √ρ_τ U √ρ_σ⁻¹ converting σ into τ.

    Args:
        sigma: Source assemblage σ.
        tau: Target assemblage τ.
        unitary: Witness U of σ ≻_SEO τ.
        tolerances: Numerical tolerances.

    Returns:
        The filter. Applied to σ it yields τ with success probability
        1/λ_opt.

    Raises:
        SupportViolationError: If rank(ρ_τ) > rank(ρ_σ) or
            supp(ρ_τ) ⊄ supp(Uρ_σU†).
        InvalidWitnessError: If U does not verify the ordering otherwise.
        ContractionViolationError: If the filter exceeds a contraction by more
            than the ordering tolerance.
    """
    rho_sigma = reduced_state(sigma, tolerances=tolerances)
    rho_tau = reduced_state(tau, tolerances=tolerances)
    rank_sigma = linalg.rank(rho_sigma, tolerances=tolerances)
    rank_tau = linalg.rank(rho_tau, tolerances=tolerances)
    if rank_tau > rank_sigma:
        msg = (
            f"No filter can raise the rank of the reduced state from "
            f"{rank_sigma} to {rank_tau}."
        )
        raise errors.SupportViolationError(msg)
    result = ordering.verify_order_witness(sigma, tau, unitary, tolerances=tolerances)
    if isinstance(result, ordering.WitnessRejection):
        if result.reason is ordering.RejectionReason.SUPPORT:
            msg = (
                "The rotated support of σ does not contain the support of τ "
                f"(deviation {result.support_deviation:.3e})."
            )
            raise errors.SupportViolationError(msg)
        msg = (
            f"Unitary does not witness the ordering ({result.reason.value}, "
            f"residual {result.residual:.3e})."
        )
        raise errors.InvalidWitnessError(msg)

    operator = (
        linalg.matrix_sqrt(rho_tau, tolerances=tolerances)
        @ result.unitary
        @ linalg.sqrt_pinv(rho_sigma, tolerances=tolerances)
    ) / np.sqrt(result.lambda_opt)
    largest = float(np.linalg.norm(operator, 2))
    if largest > 1 + tolerances.order:
        msg = (
            "Synthesised filter is not a contraction, largest singular value "
            f"{largest:.16g}."
        )
        raise errors.ContractionViolationError(msg)
    if largest > 1:
        logger.warning(
            "Renormalising the synthesised filter, largest singular value "
            "%.16g.",
            largest,
        )
        operator = operator / (largest * (1 + _RENORMALISATION_MARGIN))
    return FilterKraus.from_operator(operator, tolerances=tolerances)


def max_success_probability(
    sigma: StateAssemblage,
    tau: StateAssemblage,
    witnesses: t.Sequence[Operator],
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[float, Operator]:
    """Best success probability over a list of witnesses.

    The result is a lower bound on the optimal success probability over all
    witnesses, and equals it if the list exhausts them.

    Args:
        sigma: Source assemblage σ.
        tau: Target assemblage τ.
        witnesses: Candidate unitaries; each must verify σ ≻_SEO τ.
        tolerances: Numerical tolerances.

    Returns:
        The best probability 2^(−D_max(ρ_τ‖Uρ_σU†)) and the first witness
        attaining it.

    Raises:
        EmptyWitnessListError: If no witness is given.
        InvalidWitnessError: If a witness fails verification.
    """
    if len(witnesses) == 0:
        msg = "At least one witness is required."
        raise errors.EmptyWitnessListError(msg)
    best_probability = -1.0
    best_unitary: Operator = witnesses[0]
    for index, unitary in enumerate(witnesses):
        result = ordering.verify_order_witness(
            sigma,
            tau,
            unitary,
            tolerances=tolerances,
        )
        if isinstance(result, ordering.WitnessRejection):
            msg = f"Witness {index} is rejected: {result.reason.value}."
            raise errors.InvalidWitnessError(msg)
        if result.success_probability > best_probability:
            best_probability = result.success_probability
            best_unitary = result.unitary
    return best_probability, best_unitary
