"""Block structured semidefinite programs.

A problem has named Hermitian block variables X_b, a real linear objective
Σ_b tr(C_b X_b) to be minimised and real linear equalities
Σ_b tr(A_{ib} X_b) = b_i. Blocks are positive semidefinite unless declared
free. The coefficient operators C_b and A_{ib} are Hermitian, so every
functional is real on Hermitian variables.

Matrix valued equalities are added with `SDPProblem.add_matrix_equality`,
which expands them into one scalar equality per element of an orthonormal
Hermitian basis.
"""
from __future__ import annotations

import typing as t
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from steerdistil.core import linalg
from steerdistil.core.errors import IllFormedProblemError
from steerdistil.core.helper import Operator

# Adjoint of a linear map from a block to the constraint space: it receives a
# Hermitian basis element T of the constraint space and returns the
# coefficient operator of the block.
AdjointMap = t.Callable[[Operator], Operator]


class SolutionStatus(Enum):
    """Termination status of the solver."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class Block:
    """Block variable declaration."""

    name: str
    dim: int
    psd: bool = True


@dataclass(frozen=True)
class Equality:
    """Scalar equality Σ_b tr(A_b X_b) = rhs."""

    coefficients: t.Dict[str, Operator]
    rhs: float
    label: str = ""


@dataclass
class SDPProblem:
    """Minimise Σ_b tr(C_b X_b) s.t. Σ_b tr(A_{ib} X_b) = b_i, X_b ⪰ 0.

    Args:
        blocks: Declared block variables.
        objective: Objective coefficient per block; missing blocks have a
            zero coefficient.
        equalities: Scalar equality constraints.
    """

    blocks: t.List[Block] = field(default_factory=list)
    objective: t.Dict[str, Operator] = field(default_factory=dict)
    equalities: t.List[Equality] = field(default_factory=list)

    def add_block(self, name: str, dim: int, *, psd: bool = True) -> str:
        """Declare a block variable.

        Raises:
            IllFormedProblemError: If the name is taken or dim < 1.
        """
        if name in self.block_dims:
            msg = f"Block {name!r} is declared twice."
            raise IllFormedProblemError(msg)
        if dim < 1:
            msg = f"Block {name!r} needs a positive dimension, got {dim}."
            raise IllFormedProblemError(msg)
        self.blocks.append(Block(name, dim, psd))
        return name

    @property
    def block_dims(self) -> t.Dict[str, int]:
        """Dimension of every block by name."""
        return {block.name: block.dim for block in self.blocks}

    @property
    def psd_blocks(self) -> t.FrozenSet[str]:
        """Names of the blocks constrained to be PSD."""
        return frozenset(block.name for block in self.blocks if block.psd)

    def set_objective(self, name: str, coefficient: object) -> None:
        """Set the objective coefficient C_b of a block."""
        self.objective[name] = np.asarray(coefficient, dtype=np.complex128)

    def add_equality(
        self,
        coefficients: t.Mapping[str, object],
        rhs: float,
        label: str = "",
    ) -> None:
        """Add the scalar equality Σ_b tr(A_b X_b) = rhs."""
        self.equalities.append(
            Equality(
                {
                    name: np.asarray(value, dtype=np.complex128)
                    for name, value in coefficients.items()
                },
                float(rhs),
                label,
            ),
        )

    def add_matrix_equality(
        self,
        terms: t.Mapping[str, AdjointMap],
        rhs: Operator,
        label: str = "",
    ) -> None:
        """Add the Hermitian matrix equality Σ_b Φ_b(X_b) = M.

        Args:
            terms: Adjoint Φ_b* of the linear map of every block involved.
                For Φ_b(X) = VXV† this is ``lambda T: V.conj().T @ T @ V``.
            rhs: Hermitian right hand side M.
            label: Prefix of the labels of the generated scalar equalities.
        """
        rhs = np.asarray(rhs, dtype=np.complex128)
        for index, element in enumerate(linalg.hermitian_basis(rhs.shape[0])):
            self.add_equality(
                {name: adjoint(element) for name, adjoint in terms.items()},
                float(np.real(np.trace(element @ rhs))),
                f"{label}[{index}]",
            )

    def validate(self) -> None:
        """Check dimensions and Hermiticity of all coefficient operators.

        Raises:
            IllFormedProblemError: On unknown blocks, mismatching shapes or
                non-Hermitian coefficients.
        """
        dims = self.block_dims
        if not dims:
            msg = "Problem has no block variables."
            raise IllFormedProblemError(msg)
        if not self.equalities:
            msg = "Problem has no equality constraints."
            raise IllFormedProblemError(msg)
        entries: t.List[t.Tuple[str, str, Operator]] = [
            ("objective", name, value) for name, value in self.objective.items()
        ]
        for index, equality in enumerate(self.equalities):
            label = equality.label or f"equality {index}"
            entries.extend(
                (label, name, value) for name, value in equality.coefficients.items()
            )
            if not np.isfinite(equality.rhs):
                msg = f"{label} has a non-finite right hand side."
                raise IllFormedProblemError(msg)
        for label, name, value in entries:
            if name not in dims:
                msg = f"{label} refers to the unknown block {name!r}."
                raise IllFormedProblemError(msg)
            if value.shape != (dims[name], dims[name]):
                msg = (
                    f"{label}: coefficient of block {name!r} has shape "
                    f"{value.shape}, expected {(dims[name], dims[name])}."
                )
                raise IllFormedProblemError(msg)
            scale = max(1.0, float(np.max(np.abs(value), initial=0.0)))
            if linalg.hermiticity_deviation(value) > 1e-10 * scale:  # noqa: PLR2004
                msg = f"{label}: coefficient of block {name!r} is not Hermitian."
                raise IllFormedProblemError(msg)

    def constraint_values(self, blocks: t.Mapping[str, Operator]) -> np.ndarray:
        """Values Σ_b tr(A_{ib} X_b) of all equalities at the given blocks."""
        return np.array(
            [
                sum(
                    float(np.real(np.trace(value @ blocks[name])))
                    for name, value in equality.coefficients.items()
                )
                for equality in self.equalities
            ],
        )

    def rhs(self) -> np.ndarray:
        """Right hand sides b_i."""
        return np.array([equality.rhs for equality in self.equalities])

    def objective_value(self, blocks: t.Mapping[str, Operator]) -> float:
        """Objective Σ_b tr(C_b X_b) at the given blocks."""
        return sum(
            float(np.real(np.trace(value @ blocks[name])))
            for name, value in self.objective.items()
        )

    def dual_slacks(self, multipliers: np.ndarray) -> t.Dict[str, Operator]:
        """Dual slack Z_b = C_b − Σ_i y_i A_{ib} of every block."""
        slacks = {
            block.name: np.array(
                self.objective.get(block.name, np.zeros((block.dim, block.dim))),
                dtype=np.complex128,
            )
            for block in self.blocks
        }
        for value, equality in zip(multipliers, self.equalities):
            for name, coefficient in equality.coefficients.items():
                slacks[name] = slacks[name] - value * coefficient
        return slacks

    def primal_residual(self, blocks: t.Mapping[str, Operator]) -> float:
        """Largest absolute violation of an equality."""
        return float(np.max(np.abs(self.constraint_values(blocks) - self.rhs())))


@dataclass(frozen=True)
class SolverOptions:
    """Options of the interior point solver.

    Args:
        gap_tol: Absolute duality gap required for `SolutionStatus.OPTIMAL`.
        feas_tol: Primal and dual feasibility residual required for
            `SolutionStatus.OPTIMAL`.
        max_iters: Iteration limit.
        step_fraction: Fraction of the distance to the cone boundary taken
            in every step.
        trace_bound: Trace bound of the infeasibility detection problem.
        dump_path: If set, the problem is written to this file in the sparse
            triplet format of `steerdistil.sdp.dump` before solving.
    """

    gap_tol: float = 1e-7
    feas_tol: float = 1e-8
    max_iters: int = 100
    step_fraction: float = 0.95
    trace_bound: float = 1e6
    dump_path: t.Optional[str] = None


DEFAULT_SOLVER_OPTIONS = SolverOptions()


@dataclass(frozen=True)
class SDPSolution:
    """Solution of an `SDPProblem`.

    Args:
        status: Termination status.
        primal_blocks: Value of every block variable.
        dual_multipliers: Multiplier y_i of every equality.
        primal_objective: Σ_b tr(C_b X_b).
        dual_objective: Σ_i b_i y_i.
        gap: primal_objective − dual_objective.
        primal_residual: Largest equality violation of the primal blocks.
        dual_residual: Largest negative eigenvalue magnitude of the dual
            slacks C_b − Σ_i y_i A_{ib} on PSD blocks (and largest entry on
            free blocks).
        iterations: Number of interior point iterations.
        certificate: For `SolutionStatus.INFEASIBLE`, multipliers y with
            bᵀy > 0 and −Σ_i y_i A_{ib} ⪰ 0 up to tolerance.
        certificate_value: bᵀy of the certificate.
    """

    status: SolutionStatus
    primal_blocks: t.Dict[str, Operator]
    dual_multipliers: np.ndarray
    primal_objective: float
    dual_objective: float
    gap: float
    primal_residual: float
    dual_residual: float
    iterations: int
    certificate: t.Optional[np.ndarray] = None
    certificate_value: float = 0.0

    @property
    def optimal(self) -> bool:
        """Whether the solver converged."""
        return self.status is SolutionStatus.OPTIMAL
