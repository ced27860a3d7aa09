"""Primal-dual interior point solver for `SDPProblem`.

The problem is brought into the real standard form

    min Σ_j ⟨C_j, Y_j⟩  s.t.  Σ_j ⟨A_ij, Y_j⟩ = b_i,  Y_j ⪰ 0

where complex Hermitian blocks are embedded as real symmetric blocks
[[Re X, −Im X], [Im X, Re X]] of twice the size, blocks with real data stay
real, and free blocks are split into a difference of two PSD blocks.
Linearly dependent equalities are removed first; an inconsistent linear
system is reported as infeasible right away.

The iteration is an infeasible start path following method with the HKM
search direction and Mehrotra's predictor-corrector step. If it does not
converge, an auxiliary problem that is strictly feasible by construction
proposes multipliers, which are reported as an infeasibility certificate
only after bᵀy > 0 and −A*(y) ⪰ 0 are checked.
"""
from __future__ import annotations

import logging
import typing as t
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from steerdistil.core import linalg
from steerdistil.sdp import dump
from steerdistil.sdp.problem import (
    DEFAULT_SOLVER_OPTIONS,
    SDPProblem,
    SDPSolution,
    SolutionStatus,
    SolverOptions,
)

logger = logging.getLogger(__name__)

_DIVERGENCE = 1e12
_RANK_CUTOFF = 1e-10
_INFEASIBILITY_MARGIN = 1e-6


@dataclass(frozen=True)
class _Part:
    """Origin of a standard form block."""

    block: str
    real: bool
    sign: int


@dataclass
class _StandardForm:
    constraints: t.List[np.ndarray]
    objective: t.List[np.ndarray]
    rhs: np.ndarray
    parts: t.List[_Part]

    @property
    def n_constraints(self) -> int:
        return int(self.rhs.shape[0])

    def apply(self, blocks: t.Sequence[np.ndarray]) -> np.ndarray:
        """A(Y) = (Σ_j ⟨A_ij, Y_j⟩)_i."""
        return sum(
            (np.einsum("mij,ij->m", a, y) for a, y in zip(self.constraints, blocks)),
            np.zeros(self.n_constraints),
        )

    def adjoint(self, multipliers: np.ndarray) -> t.List[np.ndarray]:
        """A*(y) = (Σ_i y_i A_ij)_j."""
        return [np.einsum("m,mij->ij", multipliers, a) for a in self.constraints]

    def select(self, rows: np.ndarray) -> _StandardForm:
        return _StandardForm(
            [a[rows] for a in self.constraints],
            self.objective,
            self.rhs[rows],
            self.parts,
        )


@dataclass
class _Iterate:
    primal: t.List[np.ndarray]
    multipliers: np.ndarray
    slack: t.List[np.ndarray]
    converged: bool
    iterations: int


def _realify(matrix: np.ndarray) -> np.ndarray:
    real, imag = matrix.real, matrix.imag
    top = np.concatenate([real, -imag], axis=-1)
    bottom = np.concatenate([imag, real], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def _unrealify(matrix: np.ndarray) -> np.ndarray:
    dim = matrix.shape[0] // 2
    upper, lower = matrix[:dim], matrix[dim:]
    real = (upper[:, :dim] + lower[:, dim:]) / 2
    imag = (lower[:, :dim] - upper[:, dim:]) / 2
    return real + 1j * imag


def _standard_form(problem: SDPProblem) -> _StandardForm:
    constraints = []
    objective = []
    parts = []
    for block in problem.blocks:
        zero = np.zeros((block.dim, block.dim), dtype=np.complex128)
        stack = np.array(
            [eq.coefficients.get(block.name, zero) for eq in problem.equalities],
        )
        cost = problem.objective.get(block.name, zero)
        stack = (stack + linalg.dagger(stack)) / 2
        cost = (cost + linalg.dagger(cost)) / 2
        real = not (np.any(np.abs(stack.imag) > 0) or np.any(np.abs(cost.imag) > 0))
        if real:
            stack, cost = stack.real, cost.real
        else:
            stack, cost = _realify(stack) / 2, _realify(cost) / 2
        for sign in (1,) if block.psd else (1, -1):
            constraints.append(sign * stack)
            objective.append(sign * cost)
            parts.append(_Part(block.name, real, sign))
    return _StandardForm(constraints, objective, problem.rhs(), parts)


def _independent_rows(
    form: _StandardForm,
) -> t.Tuple[np.ndarray, t.Optional[np.ndarray]]:
    """Indices of a maximal independent set of equalities.

    Returns:
        The kept row indices and, if the linear system is inconsistent, the
        component of b orthogonal to the range of A, which satisfies
        A*(y) = 0 and bᵀy > 0.
    """
    matrix = np.concatenate(
        [a.reshape(form.n_constraints, -1) for a in form.constraints],
        axis=1,
    )
    left, singular, _ = scipy.linalg.svd(matrix)
    largest = float(singular[0]) if singular.size else 0.0
    rank = int(np.sum(singular > _RANK_CUTOFF * largest)) if largest > 0 else 0
    null = left[:, rank:]
    ray = null @ (null.T @ form.rhs)
    if np.linalg.norm(ray) > 1e-9 * (1 + np.linalg.norm(form.rhs)):  # noqa: PLR2004
        return np.arange(form.n_constraints), ray
    _, _, permutation = scipy.linalg.qr(matrix.T, mode="economic", pivoting=True)
    return np.sort(permutation[:rank]), None


def _symmetric(matrix: np.ndarray) -> np.ndarray:
    return (matrix + matrix.T) / 2


def _max_step(
    primal: t.Sequence[np.ndarray],
    direction: t.Sequence[np.ndarray],
) -> float:
    """Largest α with Y + α dY ⪰ 0."""
    smallest = min(
        float(scipy.linalg.eigh(d, y, eigvals_only=True)[0])
        for y, d in zip(primal, direction)
    )
    return np.inf if smallest >= 0 else -1 / smallest


def _initial_point(
    form: _StandardForm,
) -> t.Tuple[t.List[np.ndarray], t.List[np.ndarray]]:
    primal = []
    slack = []
    for a, c in zip(form.constraints, form.objective):
        dim = a.shape[1]
        norms = np.sqrt(np.sum(a**2, axis=(1, 2)))
        scale = float(np.max((1 + np.abs(form.rhs)) / (1 + norms)))
        xi = max(10.0, np.sqrt(dim), dim * scale)
        eta = max(10.0, np.sqrt(dim), float(np.max(norms)), float(np.linalg.norm(c)))
        primal.append(xi * np.eye(dim))
        slack.append(eta * np.eye(dim))
    return primal, slack


def _solve_schur(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        return scipy.linalg.cho_solve(scipy.linalg.cho_factor(matrix), rhs)
    except (np.linalg.LinAlgError, ValueError):
        return scipy.linalg.lstsq(matrix, rhs)[0]


class _NewtonSystem:
    """HKM Newton system at one iterate.

    Solves A(dX) = r_p, A*(dy) + dZ = R_d, dX + sym(X dZ Z⁻¹) = target.
    """

    def __init__(
        self,
        form: _StandardForm,
        primal: t.List[np.ndarray],
        slack: t.List[np.ndarray],
        primal_residual: np.ndarray,
        dual_residual: t.List[np.ndarray],
    ) -> None:
        self.form = form
        self.primal = primal
        self.primal_residual = primal_residual
        self.dual_residual = dual_residual
        self.inverse_slack = [_symmetric(scipy.linalg.inv(z)) for z in slack]
        # M_ij = tr(A_i X A_j Z⁻¹)
        self.schur = sum(
            np.einsum("mij,nji->mn", a, y @ a @ z_inv)
            for a, y, z_inv in zip(form.constraints, primal, self.inverse_slack)
        )

    def direction(
        self,
        target: t.List[np.ndarray],
    ) -> t.Tuple[t.List[np.ndarray], np.ndarray, t.List[np.ndarray]]:
        # dX = G + sym(X A*(dy) Z⁻¹) with G = target − sym(X R_d Z⁻¹)
        base = [
            g - _symmetric(y @ r @ z_inv)
            for g, y, r, z_inv in zip(
                target,
                self.primal,
                self.dual_residual,
                self.inverse_slack,
            )
        ]
        step_y = _solve_schur(self.schur, self.primal_residual - self.form.apply(base))
        lifted = self.form.adjoint(step_y)
        step_z = [r - ay for r, ay in zip(self.dual_residual, lifted)]
        step_x = [
            _symmetric(g + y @ ay @ z_inv)
            for g, y, ay, z_inv in zip(base, self.primal, lifted, self.inverse_slack)
        ]
        return step_x, step_y, step_z


def _interior_point(form: _StandardForm, options: SolverOptions) -> _Iterate:
    """Mehrotra predictor-corrector iteration with the HKM direction."""
    primal, slack = _initial_point(form)
    multipliers = np.zeros(form.n_constraints)
    size = sum(y.shape[0] for y in primal)
    for iteration in range(options.max_iters + 1):
        primal_residual = form.rhs - form.apply(primal)
        adjoint = form.adjoint(multipliers)
        dual_residual = [c - z - ay for c, z, ay in zip(form.objective, slack, adjoint)]
        complementarity = sum(float(np.sum(y * z)) for y, z in zip(primal, slack))
        primal_objective = sum(
            float(np.sum(c * y)) for c, y in zip(form.objective, primal)
        )
        dual_objective = float(form.rhs @ multipliers)
        primal_infeasibility = float(np.max(np.abs(primal_residual), initial=0.0))
        dual_infeasibility = max(float(np.max(np.abs(r))) for r in dual_residual)
        logger.debug(
            "iter %3d  pobj % .9e  dobj % .9e  gap %.2e  pinf %.2e  dinf %.2e",
            iteration,
            primal_objective,
            dual_objective,
            complementarity,
            primal_infeasibility,
            dual_infeasibility,
        )
        if (
            primal_infeasibility <= options.feas_tol
            and dual_infeasibility <= options.feas_tol
            and complementarity <= options.gap_tol
            and abs(primal_objective - dual_objective) <= options.gap_tol
        ):
            return _Iterate(primal, multipliers, slack, True, iteration)
        scale = max(
            float(np.max(np.abs(multipliers), initial=0.0)),
            max(float(np.max(np.abs(y))) for y in primal),
        )
        if iteration == options.max_iters or scale > _DIVERGENCE:
            break
        try:
            system = _NewtonSystem(form, primal, slack, primal_residual, dual_residual)
            affine_x, _, affine_z = system.direction([-y for y in primal])
            alpha_p = min(1.0, _max_step(primal, affine_x))
            alpha_d = min(1.0, _max_step(slack, affine_z))
            mu = complementarity / size
            mu_affine = (
                sum(
                    float(np.sum((y + alpha_p * dy) * (z + alpha_d * dz)))
                    for y, dy, z, dz in zip(primal, affine_x, slack, affine_z)
                )
                / size
            )
            sigma = float(np.clip((mu_affine / mu) ** 3, 0.0, 1.0))
            target = [
                sigma * mu * z_inv - y - _symmetric(dy @ dz @ z_inv)
                for z_inv, y, dy, dz in zip(
                    system.inverse_slack,
                    primal,
                    affine_x,
                    affine_z,
                )
            ]
            step_x, step_y, step_z = system.direction(target)
            alpha_p = min(1.0, options.step_fraction * _max_step(primal, step_x))
            alpha_d = min(1.0, options.step_fraction * _max_step(slack, step_z))
        except (np.linalg.LinAlgError, ValueError):
            logger.debug("Numerical breakdown in iteration %d.", iteration)
            break
        primal = [_symmetric(y + alpha_p * dy) for y, dy in zip(primal, step_x)]
        multipliers = multipliers + alpha_d * step_y
        slack = [_symmetric(z + alpha_d * dz) for z, dz in zip(slack, step_z)]
    return _Iterate(primal, multipliers, slack, False, iteration)


def _infeasibility_certificate(
    form: _StandardForm,
    options: SolverOptions,
) -> t.Tuple[bool, float, np.ndarray]:
    """Solve min x s.t. A(Y − x·I) = b, tr Y + s = R, Y ⪰ 0, x ≥ 0, s ≥ 0.

    The auxiliary problem and its dual are strictly feasible. A positive
    optimum only excludes solutions with tr Y ≤ R, so the multipliers of the
    original equalities are a candidate certificate that `_is_certificate`
    has to confirm.

    Returns:
        Whether the auxiliary run converged, its optimal value and the
        multipliers of the original equalities.
    """
    m = form.n_constraints
    traces = np.array(
        [[np.trace(a_i) for a_i in a] for a in form.constraints],
    ).sum(axis=0)
    constraints = [
        np.concatenate([a, np.zeros((1, *a.shape[1:]))]) for a in form.constraints
    ]
    for a in constraints:
        a[m] = np.eye(a.shape[1])
    shift = np.zeros((m + 1, 1, 1))
    shift[:m, 0, 0] = -traces
    bound = np.zeros((m + 1, 1, 1))
    bound[m, 0, 0] = 1
    auxiliary = _StandardForm(
        [*constraints, shift, bound],
        [
            *(np.zeros_like(c) for c in form.objective),
            np.ones((1, 1)),
            np.zeros((1, 1)),
        ],
        np.append(form.rhs, options.trace_bound),
        form.parts,
    )
    result = _interior_point(auxiliary, options)
    value = float(result.primal[-2][0, 0])
    return result.converged, value, result.multipliers[:m]


def _is_certificate(
    form: _StandardForm,
    ray: np.ndarray,
    options: SolverOptions,
) -> bool:
    """Whether bᵀy > 0 and −A*(y) ⪰ 0 hold within the feasibility tolerance.

    Free blocks appear as a pair of opposite PSD parts, so −A*(y) has to
    vanish on them.
    """
    if float(form.rhs @ ray) <= options.feas_tol:
        return False
    return all(
        float(np.linalg.eigvalsh(-_symmetric(part))[0]) >= -options.feas_tol
        for part in form.adjoint(ray)
    )


def _recover_blocks(
    problem: SDPProblem,
    form: _StandardForm,
    primal: t.Sequence[np.ndarray],
) -> t.Dict[str, np.ndarray]:
    blocks = {
        block.name: np.zeros((block.dim, block.dim), dtype=np.complex128)
        for block in problem.blocks
    }
    for part, value in zip(form.parts, primal):
        value = value.astype(np.complex128) if part.real else _unrealify(value)
        blocks[part.block] = blocks[part.block] + part.sign * value
    return blocks


def _dual_residual(problem: SDPProblem, multipliers: np.ndarray) -> float:
    residual = 0.0
    psd = problem.psd_blocks
    for name, slack in problem.dual_slacks(multipliers).items():
        if name in psd:
            smallest = float(np.linalg.eigvalsh((slack + linalg.dagger(slack)) / 2)[0])
            residual = max(residual, -smallest)
        else:
            residual = max(residual, float(np.max(np.abs(slack))))
    return residual


def solve(
    problem: SDPProblem,
    options: SolverOptions = DEFAULT_SOLVER_OPTIONS,
) -> SDPSolution:
    """Solve a block structured SDP.

    Args:
        problem: The problem.
        options: Solver options.

    Returns:
        The solution. `SolutionStatus.OPTIMAL` guarantees the gap and
        feasibility tolerances of the options, `SolutionStatus.INFEASIBLE`
        comes with a certificate.

    Raises:
        IllFormedProblemError: If the problem data is inconsistent.
    """
    problem.validate()
    if options.dump_path is not None:
        dump.write_problem(problem, options.dump_path)
    form = _standard_form(problem)
    rows, ray = _independent_rows(form)
    m = form.n_constraints
    if ray is not None:
        logger.info("Equality constraints are inconsistent; problem is infeasible.")
        zeros = {
            block.name: np.zeros((block.dim, block.dim), dtype=np.complex128)
            for block in problem.blocks
        }
        return SDPSolution(
            status=SolutionStatus.INFEASIBLE,
            primal_blocks=zeros,
            dual_multipliers=np.zeros(m),
            primal_objective=np.inf,
            dual_objective=np.inf,
            gap=np.nan,
            primal_residual=problem.primal_residual(zeros),
            dual_residual=np.nan,
            iterations=0,
            certificate=ray,
            certificate_value=float(form.rhs @ ray),
        )

    reduced = form.select(rows)
    iterate = _interior_point(reduced, options)
    multipliers = np.zeros(m)
    multipliers[rows] = iterate.multipliers
    blocks = _recover_blocks(problem, form, iterate.primal)
    status = (
        SolutionStatus.OPTIMAL
        if iterate.converged
        else SolutionStatus.MAX_ITERATIONS
    )
    certificate = None
    certificate_value = 0.0
    if not iterate.converged:
        converged, value, ray_reduced = _infeasibility_certificate(reduced, options)
        candidate = np.zeros(m)
        candidate[rows] = ray_reduced
        if (
            converged
            and value > max(_INFEASIBILITY_MARGIN, 100 * options.gap_tol)
            and _is_certificate(form, candidate, options)
        ):
            status = SolutionStatus.INFEASIBLE
            certificate = candidate
            certificate_value = float(form.rhs @ certificate)
            logger.info(
                "Problem is infeasible, certificate value %.3e.",
                certificate_value,
            )
        else:
            logger.warning(
                "Solver stopped after %d iterations without convergence.",
                iterate.iterations,
            )

    primal_objective = problem.objective_value(blocks)
    dual_objective = float(problem.rhs() @ multipliers)
    solution = SDPSolution(
        status=status,
        primal_blocks=blocks,
        dual_multipliers=multipliers,
        primal_objective=primal_objective,
        dual_objective=dual_objective,
        gap=primal_objective - dual_objective,
        primal_residual=problem.primal_residual(blocks),
        dual_residual=_dual_residual(problem, multipliers),
        iterations=iterate.iterations,
        certificate=certificate,
        certificate_value=certificate_value,
    )
    if solution.optimal:
        logger.info(
            "Solved SDP in %d iterations: objective %.10g, gap %.2e.",
            solution.iterations,
            primal_objective,
            solution.gap,
        )
    return solution
