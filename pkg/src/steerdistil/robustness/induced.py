"""Steering-induced incompatibility.

For a measurement assemblage E and a steering measure S,

    I_S(E) = sup { S(√η U E U† √η) | η density, U unitary,
                   supp(η) ⊆ supp(U 𝕀_E U†) }.

Working in an orthonormal basis of the carrier of E, every admissible pair
is described by Q = √η U with ‖Q‖_F = 1, and the assemblage becomes
τ(Q) = Q E Q†/‖Q‖²_F. The search maximises S(τ(Q)) by gradient ascent in Q
with random restarts. The gradient is read off the dual operators F_{a|x}
of the robustness program:

    ∂S/∂Q̄ ∝ (Σ_{x,a} E_{a|x} Q† F_{a|x} − s·Q†)† / ‖Q‖²_F,  s = Σ tr(F τ).

The result is a lower bound on I_S(E).
"""
from __future__ import annotations

import logging
import typing as t
from dataclasses import dataclass

import numpy as np
from typing_extensions import Literal

from steerdistil.core import errors, linalg
from steerdistil.core.assemblage import MeasurementAssemblage, StateAssemblage
from steerdistil.core.helper import DEFAULT_TOLERANCES, Operator, Tolerances
from steerdistil.robustness.measures import (
    ROBUSTNESS_SOLVER_OPTIONS,
    RobustnessResult,
    consistent_steering_robustness,
    steering_robustness,
)
from steerdistil.sdp import SolverOptions

logger = logging.getLogger(__name__)

SteeringMeasure = Literal["SR", "SR_consistent"]

_MEASURES: t.Dict[str, t.Callable[..., RobustnessResult]] = {
    "SR": steering_robustness,
    "SR_consistent": consistent_steering_robustness,
}


@dataclass(frozen=True)
class InducedSearchConfig:
    """Configuration of the steering-induced incompatibility search.

    Args:
        n_restarts: Number of starting points. Restart 0 is η = 𝕀_E/r,
            U = I; the others start from Ginibre random Q drawn from
            ``default_rng([seed, i])``.
        max_iters: Ascent steps per restart.
        initial_step: First trial step length of every line search.
        min_step: Line searches stop below this step length.
        seed: Seed of the restart streams.
    """

    n_restarts: int = 10
    max_iters: int = 25
    initial_step: float = 0.5
    min_step: float = 1e-6
    seed: int = 0


DEFAULT_INDUCED_CONFIG = InducedSearchConfig()


@dataclass(frozen=True)
class InducedIncompatibility:
    """Best value found by `steering_induced_incompatibility`.

    Args:
        lower_bound: S(√η U E U† √η) at the reported pair.
        eta: The density η.
        unitary: The unitary U.
        restart: Restart index that produced the pair.
    """

    lower_bound: float
    eta: Operator
    unitary: Operator
    restart: int


class _Ascent:
    """S(τ(Q)) and its ascent direction on the compressed carrier."""

    def __init__(
        self,
        elements: np.ndarray,
        measure: t.Callable[..., RobustnessResult],
        options: SolverOptions,
        tolerances: Tolerances,
    ) -> None:
        self.elements = elements
        self.measure = measure
        self.options = options
        self.tolerances = tolerances

    def evaluate(self, factor: Operator) -> t.Tuple[float, Operator]:
        norm = float(np.real(np.trace(factor @ linalg.dagger(factor))))
        tau = factor @ self.elements @ linalg.dagger(factor) / norm
        result = self.measure(
            StateAssemblage((tau + linalg.dagger(tau)) / 2),
            options=self.options,
            tolerances=self.tolerances,
        )
        dual = result.witness
        scale = float(np.real(np.einsum("xaij,xaji->", dual, tau)))
        direction = (
            np.einsum("xaij,jk,xakl->il", self.elements, linalg.dagger(factor), dual)
            - scale * linalg.dagger(factor)
        ) / norm
        return result.value, linalg.dagger(direction)


def _normalised(factor: Operator) -> Operator:
    return factor / linalg.frobenius(factor)


def _climb(
    ascent: _Ascent,
    start: Operator,
    config: InducedSearchConfig,
) -> t.Tuple[float, Operator]:
    factor = _normalised(start)
    value, direction = ascent.evaluate(factor)
    for _ in range(config.max_iters):
        step = config.initial_step
        improved = False
        while step >= config.min_step:
            length = max(linalg.frobenius(direction), 1e-300)
            candidate = _normalised(factor + step * direction / length)
            try:
                candidate_value, candidate_direction = ascent.evaluate(candidate)
            except errors.SolverFailureError:
                step /= 2
                continue
            if candidate_value > value:
                factor, value = candidate, candidate_value
                direction = candidate_direction
                improved = True
                break
            step /= 2
        if not improved:
            break
    return value, factor


def steering_induced_incompatibility(
    measurements: MeasurementAssemblage,
    measure: SteeringMeasure = "SR",
    config: InducedSearchConfig = DEFAULT_INDUCED_CONFIG,
    *,
    options: SolverOptions = ROBUSTNESS_SOLVER_OPTIONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> InducedIncompatibility:
    """Lower bound on the steering-induced incompatibility I_S(E).

    Args:
        measurements: Measurement assemblage E.
        measure: Steering measure S, "SR" or "SR_consistent".
        config: Search configuration.
        options: Solver options of the robustness programs.
        tolerances: Numerical tolerances.

    Returns:
        The best value found with the pair (η, U) attaining it, expressed on
        the full space of E.

    Raises:
        ValueError: If the measure is unknown.
    """
    if measure not in _MEASURES:
        msg = (
            f"Unknown steering measure {measure!r}, "
            f"expected one of {sorted(_MEASURES)}."
        )
        raise ValueError(msg)
    compressed, basis = measurements.compressed(tolerances=tolerances)
    rank = compressed.dim
    ascent = _Ascent(compressed.elements, _MEASURES[measure], options, tolerances)
    best: t.Optional[t.Tuple[float, Operator, int]] = None
    for index in range(config.n_restarts):
        if index == 0:
            start = np.eye(rank, dtype=np.complex128)
        else:
            rng = np.random.default_rng([config.seed, index])
            start = rng.standard_normal((rank, rank))
            start = start + 1j * rng.standard_normal((rank, rank))
        try:
            value, factor = _climb(ascent, start, config)
        except errors.SolverFailureError:
            logger.warning("Restart %d of the induced search failed to solve.", index)
            continue
        logger.debug("Restart %d reached %s = %.8g.", index, measure, value)
        if best is None or value > best[0]:
            best = (value, factor, index)
    if best is None:
        msg = "Every restart of the steering-induced incompatibility search failed."
        raise errors.SolverFailureError(msg)

    value, factor, restart = best
    unitary, _ = linalg.polar_decompose(factor, tolerances=tolerances)
    eta = factor @ linalg.dagger(factor)
    complement = np.eye(measurements.dim) - basis @ linalg.dagger(basis)
    logger.info("I_%s lower bound %.10g from restart %d.", measure, value, restart)
    return InducedIncompatibility(
        lower_bound=value,
        eta=basis @ eta @ linalg.dagger(basis),
        unitary=basis @ unitary @ linalg.dagger(basis) + complement,
        restart=restart,
    )
