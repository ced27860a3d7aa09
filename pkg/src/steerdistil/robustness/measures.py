"""Membership tests and robustness measures.

The robustness of an input with respect to a noise model is the smallest t
such that (input + t·ω)/(1 + t) is free (LHS for state assemblages, jointly
measurable for measurement assemblages) for some admissible noise ω. With
the substitution σ̃_λ = (1 + t)σ_λ every measure becomes a single SDP over
one block per deterministic strategy:

    min c  s.t.  Σ_λ D(a|x,λ) σ̃_λ − S_{a|x} = input_{a|x},  σ̃_λ, S_{a|x} ⪰ 0,

with c = tr Σ_λ σ̃_λ for general state noise and Σ_λ σ̃_λ = c·R for noise
with fixed reduced state R (R = ρ_σ for consistent state noise, R = 𝕀 for
measurement noise). The slack S_{a|x} is t·ω.

Inputs are compressed to the support of their reduced state (or carrier)
first, so every program has a strictly feasible point. Membership is decided
through the robustness being zero within `MEMBERSHIP_TOLERANCE`.
"""
from __future__ import annotations

import logging
import typing as t
from dataclasses import dataclass

import numpy as np

from steerdistil.core import errors, linalg
from steerdistil.core.assemblage import (
    MeasurementAssemblage,
    StateAssemblage,
    compute_seo,
    reduced_state,
)
from steerdistil.core.helper import (
    DEFAULT_TOLERANCES,
    AssemblageKind,
    Operator,
    OperatorFamily,
    Tolerances,
)
from steerdistil.robustness.noise import NoiseKind, NoiseModel
from steerdistil.robustness.strategies import (
    DeterministicStrategySet,
    enumerate_deterministic_strategies,
)
from steerdistil.sdp import SDPProblem, SDPSolution, SolverOptions, solve

logger = logging.getLogger(__name__)

ROBUSTNESS_SOLVER_OPTIONS = SolverOptions(gap_tol=1e-9, feas_tol=1e-9, max_iters=150)

MEMBERSHIP_TOLERANCE = 1e-7

Assemblage = t.Union[StateAssemblage, MeasurementAssemblage]


@dataclass(frozen=True, eq=False)
class RobustnessResult:
    """Optimum of a robustness program.

    Args:
        value: The robustness t ≥ 0.
        optimal_noise: Noise ω of shape (n_inputs, n_outputs, dim, dim)
            attaining the value; the input itself when the value is zero.
        decomposition: Free decomposition σ_λ (or G_λ) of
            (input + t·ω)/(1 + t), one operator per deterministic strategy.
        certificate: The solved SDP.
        strategies: The strategies indexing the decomposition.
        witness: Dual operators F_{a|x}. The value is affine in the input
            with slope F to first order, and Σ tr(F_{a|x} input_{a|x}) equals
            1 + t for the general and consistent state programs.
    """

    value: float
    optimal_noise: OperatorFamily
    decomposition: np.ndarray
    certificate: SDPSolution
    strategies: DeterministicStrategySet
    witness: t.Optional[OperatorFamily] = None

    def mixture(self, elements: OperatorFamily) -> OperatorFamily:
        """(input + t·ω)/(1 + t) for the given input elements."""
        mixed = np.asarray(elements) + self.value * self.optimal_noise
        return mixed / (1 + self.value)

    def recombined(self) -> OperatorFamily:
        """Σ_λ D(a|x,λ) σ_λ, the free assemblage of the decomposition."""
        return np.einsum("lxa,lij->xaij", self.strategies.table, self.decomposition)


@dataclass(frozen=True, eq=False)
class MembershipResult:
    """Result of an LHS or JM membership test.

    Args:
        member: Whether the input is free.
        decomposition: Free decomposition of the input when it is a member.
        robustness: The robustness computation deciding membership.
    """

    member: bool
    decomposition: t.Optional[np.ndarray]
    robustness: RobustnessResult


@dataclass(frozen=True)
class DistillationGap:
    """Robustness values of an assemblage and of its SEO.

    Args:
        steering: SR(σ).
        consistent_steering: SR^(c)(σ).
        incompatibility: IR(B^(σ)).
    """

    steering: float
    consistent_steering: float
    incompatibility: float

    @property
    def distillable_gap(self) -> float:
        """IR(B^(σ)) − SR(σ), an upper bound on what filters can gain."""
        return self.incompatibility - self.steering

    @property
    def consistency_gap(self) -> float:
        """|IR(B^(σ)) − SR^(c)(σ)|, zero up to numerics."""
        return abs(self.incompatibility - self.consistent_steering)


def _identity(element: Operator) -> Operator:
    return element


def _negated(element: Operator) -> Operator:
    return -element


def _scaled(reference: Operator) -> t.Callable[[Operator], Operator]:
    """Adjoint of the map c ↦ −c·reference on a 1 × 1 block."""

    def adjoint(element: Operator) -> Operator:
        return np.array([[-np.real(np.trace(element @ reference))]])

    return adjoint


def _lift(blocks: np.ndarray, basis: np.ndarray) -> np.ndarray:
    return basis @ blocks @ linalg.dagger(basis)


def _operators(solution: SDPSolution, names: t.Sequence[str]) -> np.ndarray:
    return np.array([solution.primal_blocks[name] for name in names])


def _dual_operators(
    solution: SDPSolution,
    rows: t.Sequence[int],
    dim: int,
) -> np.ndarray:
    basis = linalg.hermitian_basis(dim)
    return np.array(
        [
            np.einsum(
                "k,kij->ij",
                solution.dual_multipliers[row : row + dim * dim],
                basis,
            )
            for row in rows
        ],
    )


def _require_optimal(solution: SDPSolution, name: str) -> None:
    if not solution.optimal:
        msg = (
            f"The {name} program did not converge "
            f"(status {solution.status.value}, {solution.iterations} iterations)."
        )
        raise errors.SolverFailureError(msg, solution)


def _clamped(value: float, name: str) -> float:
    if value < -1e-6:  # noqa: PLR2004
        logger.warning("Negative %s %.3e clamped to zero.", name, value)
    return max(value, 0.0)


def _solve_decomposition_program(
    elements: OperatorFamily,
    basis: np.ndarray,
    reference: t.Optional[Operator],
    name: str,
    options: SolverOptions,
) -> RobustnessResult:
    """Solve the robustness program of compressed elements and lift the result."""
    n_inputs, n_outputs, dim = elements.shape[:3]
    strategies = enumerate_deterministic_strategies(n_inputs, n_outputs)
    problem = SDPProblem()
    strategy_names = [
        problem.add_block(f"strategy[{index}]", dim)
        for index in range(len(strategies))
    ]
    slack_names = [
        [problem.add_block(f"slack[{x}][{a}]", dim) for a in range(n_outputs)]
        for x in range(n_inputs)
    ]
    if reference is None:
        for block in strategy_names:
            problem.set_objective(block, np.eye(dim))
    else:
        problem.add_block("scale", 1)
        problem.set_objective("scale", np.ones((1, 1)))
        terms = {block: _identity for block in strategy_names}
        terms["scale"] = _scaled(reference)
        problem.add_matrix_equality(terms, np.zeros((dim, dim)), "reference")
    rows = []
    for x, a in np.ndindex(n_inputs, n_outputs):
        terms = {
            strategy_names[index]: _identity
            for index in np.flatnonzero(strategies.responses[:, x] == a)
        }
        terms[slack_names[x][a]] = _negated
        rows.append(len(problem.equalities))
        problem.add_matrix_equality(terms, elements[x, a], f"decomposition[{x}][{a}]")

    solution = solve(problem, options)
    _require_optimal(solution, name)
    value = _clamped(solution.primal_objective - 1, name)
    decomposition = _lift(_operators(solution, strategy_names), basis) / (1 + value)
    lifted_input = _lift(elements, basis)
    if value > MEMBERSHIP_TOLERANCE:
        slack = np.array([_operators(solution, row) for row in slack_names])
        noise = _lift(slack, basis) / value
    else:
        noise = lifted_input
    witness = _lift(_dual_operators(solution, rows, dim), basis)
    logger.info("%s = %.10g", name, value)
    return RobustnessResult(
        value=value,
        optimal_noise=noise,
        decomposition=decomposition,
        certificate=solution,
        strategies=strategies,
        witness=witness.reshape(n_inputs, n_outputs, *witness.shape[1:]),
    )


def steering_robustness(
    sigma: StateAssemblage,
    *,
    options: SolverOptions = ROBUSTNESS_SOLVER_OPTIONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> RobustnessResult:
    """Generalised steering robustness SR(σ) with arbitrary state noise.

    Raises:
        SolverFailureError: If the program does not converge.
    """
    compressed, basis = sigma.compressed(tolerances=tolerances)
    return _solve_decomposition_program(compressed.elements, basis, None, "SR", options)


def consistent_steering_robustness(
    sigma: StateAssemblage,
    *,
    options: SolverOptions = ROBUSTNESS_SOLVER_OPTIONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> RobustnessResult:
    """Consistent steering robustness SR^(c)(σ), noise sharing ρ_σ.

    Raises:
        SolverFailureError: If the program does not converge.
    """
    compressed, basis = sigma.compressed(tolerances=tolerances)
    reference = reduced_state(compressed, tolerances=tolerances)
    return _solve_decomposition_program(
        compressed.elements,
        basis,
        reference,
        "SR^(c)",
        options,
    )


def incompatibility_robustness(
    measurements: MeasurementAssemblage,
    *,
    options: SolverOptions = ROBUSTNESS_SOLVER_OPTIONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> RobustnessResult:
    """Generalised incompatibility robustness IR(E) on the carrier of E.

    Raises:
        SolverFailureError: If the program does not converge.
    """
    compressed, basis = measurements.compressed(tolerances=tolerances)
    return _solve_decomposition_program(
        compressed.elements,
        basis,
        np.eye(compressed.dim),
        "IR",
        options,
    )


def lhs_membership(
    sigma: StateAssemblage,
    *,
    options: SolverOptions = ROBUSTNESS_SOLVER_OPTIONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> MembershipResult:
    """Decide whether σ admits a local hidden state model."""
    result = steering_robustness(sigma, options=options, tolerances=tolerances)
    member = result.value <= MEMBERSHIP_TOLERANCE
    return MembershipResult(member, result.decomposition if member else None, result)


def jm_membership(
    measurements: MeasurementAssemblage,
    *,
    options: SolverOptions = ROBUSTNESS_SOLVER_OPTIONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> MembershipResult:
    """Decide whether E is jointly measurable."""
    result = incompatibility_robustness(
        measurements,
        options=options,
        tolerances=tolerances,
    )
    member = result.value <= MEMBERSHIP_TOLERANCE
    return MembershipResult(member, result.decomposition if member else None, result)


def _custom_robustness(
    elements: OperatorFamily,
    kind: AssemblageKind,
    carrier: Operator,
    model: NoiseModel,
    options: SolverOptions,
) -> RobustnessResult:
    """Robustness program with explicit noise variables."""
    n_inputs, n_outputs, dim = elements.shape[:3]
    strategies = enumerate_deterministic_strategies(n_inputs, n_outputs)
    problem = SDPProblem()
    strategy_names = [
        problem.add_block(f"strategy[{index}]", dim)
        for index in range(len(strategies))
    ]
    problem.add_block("weight", 1)
    problem.set_objective("weight", np.ones((1, 1)))
    fixed = model.fixed_noise
    noise_names = [
        [f"noise[{x}][{a}]" for a in range(n_outputs)] for x in range(n_inputs)
    ]
    if fixed is None:
        for row in noise_names:
            for block in row:
                problem.add_block(block, dim)
    for x, a in np.ndindex(n_inputs, n_outputs):
        terms = {
            strategy_names[index]: _identity
            for index in np.flatnonzero(strategies.responses[:, x] == a)
        }
        if fixed is None:
            terms[noise_names[x][a]] = _negated
        else:
            terms["weight"] = _scaled(fixed[x, a])
        problem.add_matrix_equality(terms, elements[x, a], f"decomposition[{x}][{a}]")
    if fixed is None:
        if kind is AssemblageKind.STATE:
            for x in range(1, n_inputs):
                terms = {noise_names[x][a]: _identity for a in range(n_outputs)}
                terms.update({noise_names[0][a]: _negated for a in range(n_outputs)})
                problem.add_matrix_equality(
                    terms,
                    np.zeros((dim, dim)),
                    f"no-signalling[{x}]",
                )
            trace = {noise_names[0][a]: np.eye(dim) for a in range(n_outputs)}
            problem.add_equality({**trace, "weight": -np.ones((1, 1))}, 0.0, "trace")
        else:
            for x in range(n_inputs):
                terms = {noise_names[x][a]: _identity for a in range(n_outputs)}
                terms["weight"] = _scaled(carrier)
                problem.add_matrix_equality(terms, np.zeros((dim, dim)), f"povm[{x}]")
        for index, constraint in enumerate(model.constraints):
            coefficients = {
                noise_names[x][a]: constraint.coefficients[x, a]
                for x, a in np.ndindex(n_inputs, n_outputs)
            }
            coefficients["weight"] = -constraint.value * np.ones((1, 1))
            problem.add_equality(coefficients, 0.0, f"custom[{index}]")

    solution = solve(problem, options)
    _require_optimal(solution, "custom robustness")
    value = _clamped(solution.primal_objective, "custom robustness")
    if fixed is not None:
        noise = np.array(fixed)
    elif value > MEMBERSHIP_TOLERANCE:
        noise = np.array([_operators(solution, row) for row in noise_names]) / value
    else:
        noise = np.array(elements)
    logger.info("custom robustness = %.10g", value)
    return RobustnessResult(
        value=value,
        optimal_noise=noise,
        decomposition=_operators(solution, strategy_names) / (1 + value),
        certificate=solution,
        strategies=strategies,
    )


def robustness_with_noise_model(
    assemblage: Assemblage,
    model: NoiseModel,
    *,
    options: SolverOptions = ROBUSTNESS_SOLVER_OPTIONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> RobustnessResult:
    """Robustness of a state or measurement assemblage under a noise model.

    The built-in models reduce to `steering_robustness`,
    `consistent_steering_robustness` and `incompatibility_robustness`.
    Custom models are solved on the full space with explicit noise
    variables.

    Raises:
        UnrepresentableNoiseModelError: If the model does not fit the input.
        SolverFailureError: If the program does not converge.
    """
    kind = (
        AssemblageKind.STATE
        if isinstance(assemblage, StateAssemblage)
        else AssemblageKind.MEASUREMENT
    )
    model.check_applicable(assemblage.elements.shape, kind)
    if model.kind is NoiseKind.GENERAL_STATE:
        return steering_robustness(
            assemblage,  # type: ignore[arg-type]
            options=options,
            tolerances=tolerances,
        )
    if model.kind is NoiseKind.CONSISTENT_STATE:
        return consistent_steering_robustness(
            assemblage,  # type: ignore[arg-type]
            options=options,
            tolerances=tolerances,
        )
    if model.kind is NoiseKind.GENERAL_MEASUREMENT:
        return incompatibility_robustness(
            assemblage,  # type: ignore[arg-type]
            options=options,
            tolerances=tolerances,
        )
    carrier = (
        assemblage.carrier
        if isinstance(assemblage, MeasurementAssemblage)
        else np.eye(assemblage.dim)
    )
    return _custom_robustness(assemblage.elements, kind, carrier, model, options)


def distillation_gap(
    sigma: StateAssemblage,
    *,
    options: SolverOptions = ROBUSTNESS_SOLVER_OPTIONS,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> DistillationGap:
    """SR(σ), SR^(c)(σ) and IR of the SEO of σ."""
    return DistillationGap(
        steering=steering_robustness(
            sigma,
            options=options,
            tolerances=tolerances,
        ).value,
        consistent_steering=consistent_steering_robustness(
            sigma,
            options=options,
            tolerances=tolerances,
        ).value,
        incompatibility=incompatibility_robustness(
            compute_seo(sigma, tolerances=tolerances),
            options=options,
            tolerances=tolerances,
        ).value,
    )


def convexity_gap(
    first: MeasurementAssemblage,
    second: MeasurementAssemblage,
    weight: float,
    *,
    options: SolverOptions = ROBUSTNESS_SOLVER_OPTIONS,
) -> float:
    """p·IR(E₁) + (1 − p)·IR(E₂) − IR(pE₁ + (1 − p)E₂), non-negative for a convex IR."""
    mixed = MeasurementAssemblage(
        weight * first.elements + (1 - weight) * second.elements,
        carrier=first.carrier,
    )
    return (
        weight * incompatibility_robustness(first, options=options).value
        + (1 - weight) * incompatibility_robustness(second, options=options).value
        - incompatibility_robustness(mixed, options=options).value
    )
