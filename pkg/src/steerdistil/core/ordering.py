"""SEO ordering between state assemblages.

σ ≻_SEO τ holds if a unitary U exists with supp(ρ_τ) ⊆ supp(U ρ_σ U†) and

    τ_{a|x} = √ρ_τ U B_{a|x} U† √ρ_τ,

where B is the steering-equivalent observable of σ. Such a U is called a
witness. The ordering is equivalent to the existence of a single Kraus local
filter converting σ into τ.

Verification of a given witness is exact up to tolerances. The search for a
witness is a local optimisation over the unitary group with random restarts
and is therefore incomplete: a failed search reports `VerdictStatus.UNKNOWN`,
never a refutation. The only certain refutation is the rank no-go
rank(ρ_τ) > rank(ρ_σ).
"""
from __future__ import annotations

import logging
import math
import typing as t
from dataclasses import dataclass
from enum import Enum

import numpy as np
import scipy.linalg
from typing_extensions import Literal

from steerdistil.core import errors, linalg
from steerdistil.core.assemblage import StateAssemblage, compute_seo, reduced_state
from steerdistil.core.helper import DEFAULT_TOLERANCES, Operator, Tolerances
from steerdistil.core.maxrelent import lambda_opt

if t.TYPE_CHECKING:
    from steerdistil.core.filters import FilterKraus

logger = logging.getLogger(__name__)

StepRule = Literal["gradient", "gauss-newton"]


class RejectionReason(Enum):
    """Why a candidate unitary does not witness the ordering."""

    NOT_UNITARY = "not-unitary"
    SUPPORT = "support"
    RESIDUAL = "residual"
    INCONSISTENT = "inconsistent"


@dataclass(frozen=True)
class OrderWitness:
    """Verified witness U of σ ≻_SEO τ.

    Args:
        unitary: The unitary U.
        residual: Σ_{x,a} ‖τ_{a|x} − √ρ_τ U B_{a|x} U† √ρ_τ‖_F.
        lambda_opt: 2^D_max(ρ_τ‖U ρ_σ U†); its inverse is the success
            probability of the filter built from this witness.
    """

    unitary: Operator
    residual: float
    lambda_opt: float

    @property
    def success_probability(self) -> float:
        """Success probability 1/λ_opt of the induced filter."""
        return 1 / self.lambda_opt


@dataclass(frozen=True)
class WitnessRejection:
    """Result of a failed witness verification.

    Args:
        reason: The first failed test.
        residual: Decomposition residual (inf when not computed).
        support_deviation: ‖(I − Π_{Uρ_σU†}) Π_τ‖_F.
    """

    reason: RejectionReason
    residual: float
    support_deviation: float


class VerdictStatus(Enum):
    """Outcome of a witness search."""

    HOLDS = "holds"
    REFUTED_BY_RANK = "refuted-by-rank"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class OrderVerdict:
    """Result of `search_order_witness`.

    Args:
        status: Outcome of the search.
        witness: First verified witness (lowest restart index) if the
            ordering holds.
        best_residual: Smallest residual reached by any restart.
        best_witness: Verified witness with the smallest λ_opt among all
            restarts. Its success probability is a lower bound on the
            optimal one.
        restarts: Number of restarts that were run.
    """

    status: VerdictStatus
    witness: t.Optional[OrderWitness] = None
    best_residual: float = math.inf
    best_witness: t.Optional[OrderWitness] = None
    restarts: int = 0

    @property
    def holds(self) -> bool:
        """Whether a witness was found."""
        return self.status is VerdictStatus.HOLDS


@dataclass(frozen=True)
class SearchConfig:
    """Configuration of the witness search.

    Args:
        n_restarts: Number of starting points. Restart 0 starts at the
            identity, the others at Haar random unitaries.
        max_iters: Iteration limit per restart.
        step_rule: "gauss-newton" solves the linearised least squares
            problem in every step, "gradient" follows the steepest descent
            direction. Both halve the step until the residual decreases.
        seed: Seed of the restart streams. Restart i draws from
            ``default_rng([seed, i])``.
        exhaustive: Run every restart even after a witness was found, so
            that `OrderVerdict.best_witness` compares all of them.
    """

    n_restarts: int = 20
    max_iters: int = 500
    step_rule: StepRule = "gauss-newton"
    seed: int = 0
    exhaustive: bool = True


DEFAULT_SEARCH_CONFIG = SearchConfig()


class EquivalenceStatus(Enum):
    """Outcome of `seo_equivalent`."""

    EQUIVALENT = "equivalent"
    NOT_EQUIVALENT = "not-equivalent"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class EquivalenceVerdict:
    """Result of `seo_equivalent`.

    Args:
        status: Outcome.
        witness: Witness of σ ≻_SEO τ, or of τ ≻_SEO σ if only the reverse
            direction was found.
        reason: Human readable explanation.
    """

    status: EquivalenceStatus
    witness: t.Optional[OrderWitness] = None
    reason: str = ""


def _check_compatible(sigma: StateAssemblage, tau: StateAssemblage) -> None:
    if sigma.elements.shape != tau.elements.shape:
        msg = (
            "Cannot compare assemblages of shapes "
            f"{sigma.elements.shape} and {tau.elements.shape}."
        )
        raise errors.DimensionMismatchError(msg)


def _residual(
    tau: np.ndarray,
    root_tau: Operator,
    seo: np.ndarray,
    unitary: Operator,
) -> float:
    rotated = unitary @ seo @ linalg.dagger(unitary)
    mismatch = root_tau @ rotated @ root_tau - tau
    return float(np.sum(np.sqrt(np.sum(np.abs(mismatch) ** 2, axis=(-2, -1)))))


def verify_order_witness(
    sigma: StateAssemblage,
    tau: StateAssemblage,
    unitary: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> t.Union[OrderWitness, WitnessRejection]:
    """Check whether a unitary witnesses σ ≻_SEO τ.

    Two tests have to agree: the decomposition residual of τ, and the
    comparison of the SEO of τ with the compression of U B U† onto
    supp(ρ_τ). The second test is scaled by the smallest non-zero
    eigenvalue of ρ_τ.

    Args:
        sigma: Source assemblage σ.
        tau: Target assemblage τ.
        unitary: Candidate witness U.
        tolerances: Numerical tolerances; `Tolerances.order` bounds the
            residual.

    Returns:
        The verified witness or the reason for the rejection.

    Raises:
        DimensionMismatchError: If the operands do not match.
    """
    _check_compatible(sigma, tau)
    unitary = np.asarray(unitary, dtype=np.complex128)
    if unitary.shape != (sigma.dim, sigma.dim):
        msg = f"Unitary of shape {unitary.shape} does not act on dimension {sigma.dim}."
        raise errors.DimensionMismatchError(msg)
    if linalg.unitary_deviation(unitary) > tolerances.unitarity:
        return WitnessRejection(RejectionReason.NOT_UNITARY, math.inf, math.inf)

    rho_sigma = reduced_state(sigma, tolerances=tolerances)
    rho_tau = reduced_state(tau, tolerances=tolerances)
    rotated_rho = unitary @ rho_sigma @ linalg.dagger(unitary)
    support_deviation = linalg.support_inclusion_deviation(
        rho_tau,
        rotated_rho,
        tolerances=tolerances,
    )
    if support_deviation > tolerances.support_inclusion:
        return WitnessRejection(RejectionReason.SUPPORT, math.inf, support_deviation)

    seo = compute_seo(sigma, tolerances=tolerances).elements
    root_tau = linalg.matrix_sqrt(rho_tau, tolerances=tolerances)
    residual = _residual(tau.elements, root_tau, seo, unitary)

    eigenvalues = linalg.spectral_decompose(rho_tau, tolerances=tolerances)[0]
    smallest = float(eigenvalues[linalg.rank(rho_tau, tolerances=tolerances) - 1])
    projector = linalg.support_projector(rho_tau, tolerances=tolerances)
    compressed = projector @ unitary @ seo @ linalg.dagger(unitary) @ projector
    seo_tau = compute_seo(tau, tolerances=tolerances).elements
    seo_mismatch = float(
        np.sum(np.sqrt(np.sum(np.abs(seo_tau - compressed) ** 2, axis=(-2, -1)))),
    )

    if residual > tolerances.order:
        return WitnessRejection(RejectionReason.RESIDUAL, residual, support_deviation)
    if seo_mismatch * smallest > tolerances.order:
        logger.warning(
            "Witness tests disagree: residual %.3e, scaled SEO mismatch %.3e.",
            residual,
            seo_mismatch * smallest,
        )
        return WitnessRejection(
            RejectionReason.INCONSISTENT,
            residual,
            support_deviation,
        )
    return OrderWitness(
        unitary=unitary,
        residual=residual,
        lambda_opt=lambda_opt(rho_tau, rotated_rho, tolerances=tolerances),
    )


class _Objective:
    """f(U) = Σ ‖√ρ_τ U B U† √ρ_τ − τ‖²_F and its derivatives.

    Directions are Hermitian generators Ω of the left perturbation
    U → exp(iΩ) U.
    """

    def __init__(self, tau: np.ndarray, root_tau: Operator, seo: np.ndarray) -> None:
        self.tau = tau
        self.root_tau = root_tau
        self.seo = seo
        self.basis = linalg.hermitian_basis(root_tau.shape[0])

    def residuals(self, unitary: Operator) -> tuple[np.ndarray, np.ndarray]:
        rotated = unitary @ self.seo @ linalg.dagger(unitary)
        return rotated, self.root_tau @ rotated @ self.root_tau - self.tau

    def value(self, unitary: Operator) -> float:
        return float(np.sum(np.abs(self.residuals(unitary)[1]) ** 2))

    def gradient_step(self, unitary: Operator) -> Operator:
        """Steepest descent generator −∇f."""
        rotated, mismatch = self.residuals(unitary)
        weighted = self.root_tau @ mismatch @ self.root_tau
        commutator = rotated @ weighted - weighted @ rotated
        gradient = 2j * commutator.sum(axis=(0, 1))
        return -(gradient + linalg.dagger(gradient)) / 2

    def gauss_newton_step(self, unitary: Operator) -> Operator:
        """Least squares solution of the residual linearised in Ω."""
        rotated, mismatch = self.residuals(unitary)
        # d(residual)/dΩ_k = √ρ_τ i[T_k, C] √ρ_τ for every basis element T_k.
        commutators = 1j * (
            np.einsum("kij,xajl->kxail", self.basis, rotated)
            - np.einsum("xaij,kjl->kxail", rotated, self.basis)
        )
        columns = self.root_tau @ commutators @ self.root_tau
        jacobian = columns.reshape(columns.shape[0], -1).T
        jacobian = np.concatenate([jacobian.real, jacobian.imag])
        rhs = -np.concatenate([mismatch.ravel().real, mismatch.ravel().imag])
        coefficients = scipy.linalg.lstsq(jacobian, rhs)[0]
        return np.einsum("k,kij->ij", coefficients, self.basis)


def _descend(
    objective: _Objective,
    start: Operator,
    config: SearchConfig,
    target: float,
) -> tuple[Operator, float]:
    """Minimise the objective from one starting point by step halving."""
    unitary = start
    value = objective.value(unitary)
    step = 1.0
    for _ in range(config.max_iters):
        if value <= target:
            break
        if config.step_rule == "gauss-newton":
            direction = objective.gauss_newton_step(unitary)
            step = 1.0
        else:
            direction = objective.gradient_step(unitary)
            step = min(2 * step, 1e6)
        while step > 1e-16:  # noqa: PLR2004
            candidate = linalg.unitary_from_generator(step * direction) @ unitary
            candidate_value = objective.value(candidate)
            if candidate_value < value:
                unitary, value = candidate, candidate_value
                break
            step /= 2
        else:
            break
    return unitary, value


def search_order_witness(
    sigma: StateAssemblage,
    tau: StateAssemblage,
    config: SearchConfig = DEFAULT_SEARCH_CONFIG,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> OrderVerdict:
    """Search a unitary witnessing σ ≻_SEO τ.

    Args:
        sigma: Source assemblage σ.
        tau: Target assemblage τ.
        config: Search configuration.
        tolerances: Numerical tolerances.

    Returns:
        `VerdictStatus.REFUTED_BY_RANK` if rank(ρ_τ) > rank(ρ_σ),
        `VerdictStatus.HOLDS` if a restart produced a verified witness and
        `VerdictStatus.UNKNOWN` otherwise.
    """
    _check_compatible(sigma, tau)
    rho_sigma = reduced_state(sigma, tolerances=tolerances)
    rho_tau = reduced_state(tau, tolerances=tolerances)
    rank_sigma = linalg.rank(rho_sigma, tolerances=tolerances)
    rank_tau = linalg.rank(rho_tau, tolerances=tolerances)
    if rank_tau > rank_sigma:
        logger.info(
            "Ordering refuted by rank: rank(ρ_τ)=%d > rank(ρ_σ)=%d.",
            rank_tau,
            rank_sigma,
        )
        return OrderVerdict(VerdictStatus.REFUTED_BY_RANK)

    objective = _Objective(
        tau.elements,
        linalg.matrix_sqrt(rho_tau, tolerances=tolerances),
        compute_seo(sigma, tolerances=tolerances).elements,
    )
    # Squared target well inside the summed Frobenius tolerance.
    target = (tolerances.order / (10 * sigma.n_inputs * sigma.n_outputs)) ** 2
    first: t.Optional[OrderWitness] = None
    best: t.Optional[OrderWitness] = None
    best_residual = math.inf
    restarts = 0
    for index in range(config.n_restarts):
        restarts += 1
        if index == 0:
            start = np.eye(sigma.dim, dtype=np.complex128)
        else:
            rng = np.random.default_rng([config.seed, index])
            start = linalg.haar_unitary(sigma.dim, rng)
        unitary, value = _descend(objective, start, config, target)
        result = verify_order_witness(sigma, tau, unitary, tolerances=tolerances)
        residual = result.residual
        if not math.isfinite(residual):
            residual = math.sqrt(value)
        best_residual = min(best_residual, residual)
        logger.debug("Restart %d finished with residual %.3e.", index, residual)
        if isinstance(result, OrderWitness):
            if first is None:
                first = result
            if best is None or result.lambda_opt < best.lambda_opt:
                best = result
            if not config.exhaustive:
                break

    if first is None:
        logger.warning(
            "No witness found after %d restarts (best residual %.3e); "
            "the ordering is undecided.",
            restarts,
            best_residual,
        )
        return OrderVerdict(
            VerdictStatus.UNKNOWN,
            best_residual=best_residual,
            restarts=restarts,
        )
    logger.info(
        "Ordering holds; best witness has λ_opt=%.6g.",
        best.lambda_opt,  # type: ignore[union-attr]
    )
    return OrderVerdict(
        VerdictStatus.HOLDS,
        witness=first,
        best_residual=best_residual,
        best_witness=best,
        restarts=restarts,
    )


def seo_equivalent(
    sigma: StateAssemblage,
    tau: StateAssemblage,
    config: SearchConfig = DEFAULT_SEARCH_CONFIG,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> EquivalenceVerdict:
    """Decide SEO equivalence: σ ≻_SEO τ with supports of equal dimension.

    Different ranks of the reduced states refute equivalence with
    certainty, since the direction towards the larger rank is impossible.

    Args:
        sigma: First assemblage.
        tau: Second assemblage.
        config: Search configuration used for both directions.
        tolerances: Numerical tolerances.

    Returns:
        The tri-state verdict.
    """
    _check_compatible(sigma, tau)
    rho_sigma = reduced_state(sigma, tolerances=tolerances)
    rho_tau = reduced_state(tau, tolerances=tolerances)
    rank_sigma = linalg.rank(rho_sigma, tolerances=tolerances)
    rank_tau = linalg.rank(rho_tau, tolerances=tolerances)
    if rank_sigma != rank_tau:
        forward = search_order_witness(sigma, tau, config, tolerances=tolerances)
        reason = f"reduced state ranks differ ({rank_sigma} vs {rank_tau})"
        if forward.holds:
            reason += "; the ordering only holds one way, the filter is not reversible"
        return EquivalenceVerdict(
            EquivalenceStatus.NOT_EQUIVALENT,
            witness=forward.witness,
            reason=reason,
        )
    for source, target, direction in ((sigma, tau, "σ ≻ τ"), (tau, sigma, "τ ≻ σ")):
        verdict = search_order_witness(source, target, config, tolerances=tolerances)
        if verdict.holds:
            return EquivalenceVerdict(
                EquivalenceStatus.EQUIVALENT,
                witness=verdict.witness,
                reason=f"witness found for {direction} with equal ranks",
            )
    return EquivalenceVerdict(
        EquivalenceStatus.UNKNOWN,
        reason="no witness found in either direction",
    )


def is_reversible(
    sigma: StateAssemblage,
    tau: StateAssemblage,
    config: SearchConfig = DEFAULT_SEARCH_CONFIG,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> bool:
    """Whether τ can be filtered back into σ, as far as the search can tell."""
    verdict = seo_equivalent(sigma, tau, config, tolerances=tolerances)
    return verdict.status is EquivalenceStatus.EQUIVALENT


def witness_from_filter(
    sigma: StateAssemblage,
    kraus: t.Union[Operator, FilterKraus],
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Operator:
    """Witness of σ ≻_SEO KσK†/p read off a filter.

    With A = K√ρ_σ/√p the left polar decomposition A = U P gives
    A = √(AA†) U, hence τ = √ρ_τ U B U† √ρ_τ.

    Args:
        sigma: Source assemblage σ.
        kraus: Kraus operator K, plain or wrapped in a `FilterKraus`.
        tolerances: Numerical tolerances.

    Returns:
        The unitary U.

    Raises:
        VanishingSuccessProbabilityError: If tr(Kρ_σK†) vanishes.
    """
    operator = np.asarray(getattr(kraus, "operator", kraus), dtype=np.complex128)
    rho = reduced_state(sigma, tolerances=tolerances)
    probability = float(np.real(np.trace(operator @ rho @ linalg.dagger(operator))))
    if probability <= tolerances.success_probability:
        msg = f"Filter succeeds with probability {probability:.3e}."
        raise errors.VanishingSuccessProbabilityError(msg)
    root = linalg.matrix_sqrt(rho, tolerances=tolerances)
    unitary, _ = linalg.polar_decompose(
        operator @ root / math.sqrt(probability),
        tolerances=tolerances,
    )
    return unitary


def compose_witnesses(first: Operator, second: Operator) -> Operator:
    """Witness U₂U₁ of σ ≻ υ from witnesses U₁ of σ ≻ τ and U₂ of τ ≻ υ."""
    return np.asarray(second) @ np.asarray(first)
