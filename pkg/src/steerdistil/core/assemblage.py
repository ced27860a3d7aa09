"""State and measurement assemblages.

An assemblage is a family of operators indexed by an input x and an output a,
stored as a read-only array of shape (n_inputs, n_outputs, dim, dim) with the
fixed [x][a] layout. Families with input-dependent outcome counts are padded
with zero operators.

A state assemblage σ_{a|x} carries the unnormalised conditional states of the
trusted party; its reduced state ρ_σ = Σ_a σ_{a|x} does not depend on x. A
measurement assemblage E_{a|x} carries one POVM per input on the subspace
given by its carrier projector. The steering-equivalent observable (SEO) of σ
is the measurement assemblage √ρ_σ⁻¹ σ_{a|x} √ρ_σ⁻¹ on supp(ρ_σ).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from steerdistil.core import errors, linalg
from steerdistil.core.helper import (
    DEFAULT_TOLERANCES,
    Operator,
    OperatorFamily,
    Tolerances,
    frozen,
)


def _as_family(elements: object) -> np.ndarray:
    """Convert array-like input to a read-only operator family."""
    array = np.array(elements, dtype=np.complex128)
    if array.ndim != 4 or array.shape[2] != array.shape[3]:  # noqa: PLR2004
        msg = (
            "An assemblage needs shape (n_inputs, n_outputs, dim, dim), "
            f"got {array.shape}."
        )
        raise errors.DimensionMismatchError(msg)
    if 0 in array.shape:
        msg = f"An assemblage cannot have an empty axis, got {array.shape}."
        raise errors.DimensionMismatchError(msg)
    return frozen(array)


@dataclass(frozen=True, eq=False)
class StateAssemblage:
    """Family σ_{a|x} of unnormalised states of the trusted party.

    Args:
        elements: Array of shape (n_inputs, n_outputs, dim, dim).
    """

    elements: OperatorFamily

    def __post_init__(self) -> None:
        object.__setattr__(self, "elements", _as_family(self.elements))

    @property
    def dim(self) -> int:
        """Hilbert space dimension of the trusted party."""
        return int(self.elements.shape[2])

    @property
    def n_inputs(self) -> int:
        """Number of measurement inputs x."""
        return int(self.elements.shape[0])

    @property
    def n_outputs(self) -> int:
        """Number of measurement outcomes a."""
        return int(self.elements.shape[1])

    @staticmethod
    def from_conditionals(
        probabilities: np.ndarray,
        state: Operator,
    ) -> StateAssemblage:
        """Assemblage p(a|x)·ρ built from one state and a response table.

        Args:
            probabilities: Array of shape (n_inputs, n_outputs).
            state: Density operator ρ.

        Returns:
            The trivially unsteerable assemblage.
        """
        probabilities = np.asarray(probabilities, dtype=float)
        return StateAssemblage(
            probabilities[:, :, None, None] * np.asarray(state)[None, None],
        )

    def compressed(
        self,
        *,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> tuple[StateAssemblage, np.ndarray]:
        """Express the assemblage in an orthonormal basis of supp(ρ_σ).

        Returns:
            The compressed assemblage and the isometry V (dim × rank) with
            σ_{a|x} = V σ'_{a|x} V†.
        """
        basis = linalg.support_basis(
            reduced_state(self, tolerances=tolerances),
            tolerances=tolerances,
        )
        return (
            StateAssemblage(linalg.dagger(basis) @ self.elements @ basis),
            basis,
        )


@dataclass(frozen=True, eq=False)
class MeasurementAssemblage:
    """Family E_{a|x} of effects, one POVM per input.

    Args:
        elements: Array of shape (n_inputs, n_outputs, dim, dim).
        carrier: Projector 𝕀_M onto the subspace the POVMs live in. Every
            POVM sums to it. Defaults to the identity.
    """

    elements: OperatorFamily
    carrier: Operator = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        elements = _as_family(self.elements)
        object.__setattr__(self, "elements", elements)
        carrier = np.eye(elements.shape[2]) if self.carrier is None else self.carrier
        carrier = np.asarray(carrier, dtype=np.complex128)
        if carrier.shape != elements.shape[2:]:
            msg = (
                f"Carrier of shape {carrier.shape} does not match effects of "
                f"dimension {elements.shape[2]}."
            )
            raise errors.DimensionMismatchError(msg)
        object.__setattr__(self, "carrier", frozen(carrier))

    @property
    def dim(self) -> int:
        """Hilbert space dimension the effects act on."""
        return int(self.elements.shape[2])

    @property
    def n_inputs(self) -> int:
        """Number of measurement inputs x."""
        return int(self.elements.shape[0])

    @property
    def n_outputs(self) -> int:
        """Number of measurement outcomes a."""
        return int(self.elements.shape[1])

    @property
    def carrier_rank(self) -> int:
        """Dimension of the subspace the POVMs live in."""
        return int(round(float(np.real(np.trace(self.carrier)))))

    def compressed(
        self,
        *,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> tuple[MeasurementAssemblage, np.ndarray]:
        """Express the POVMs in an orthonormal basis of the carrier.

        Returns:
            The compressed assemblage (identity carrier) and the isometry V
            with E_{a|x} = V E'_{a|x} V†.
        """
        basis = linalg.support_basis(self.carrier, tolerances=tolerances)
        return (
            MeasurementAssemblage(linalg.dagger(basis) @ self.elements @ basis),
            basis,
        )


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Density operator ρ_AB shared between the untrusted and trusted party.

    Args:
        matrix: Density matrix of shape (dim_a·dim_b, dim_a·dim_b) in the
            A ⊗ B ordering.
        dim_a: Dimension of the untrusted party A.
        dim_b: Dimension of the trusted party B.

    Raises:
        DimensionMismatchError: If the matrix does not match the dimensions.
        NegativeOperatorError: If the matrix is not PSD.
        NonUnitTraceError: If the trace deviates from one.
    """

    matrix: Operator
    dim_a: int
    dim_b: int

    def __post_init__(self) -> None:
        matrix = np.asarray(self.matrix, dtype=np.complex128)
        size = self.dim_a * self.dim_b
        if matrix.shape != (size, size):
            msg = (
                f"Bipartite state of shape {matrix.shape} does not match "
                f"dim_a={self.dim_a}, dim_b={self.dim_b}."
            )
            raise errors.DimensionMismatchError(msg)
        require_density(matrix)
        object.__setattr__(self, "matrix", frozen(matrix))

    def reduced_b(self) -> Operator:
        """Partial trace over A."""
        tensor = self.matrix.reshape(self.dim_a, self.dim_b, self.dim_a, self.dim_b)
        return np.einsum("ibic->bc", tensor)


@dataclass(frozen=True)
class Violation:
    """Single invariant violation found by a validator.

    Args:
        kind: Violated invariant, one of "shape", "hermiticity",
            "positivity", "no-signalling", "trace", "normalisation",
            "carrier".
        index: (x, a) of the offending element, (x,) for per-input
            invariants or () for global ones.
        magnitude: Size of the deviation.
    """

    kind: str
    index: tuple[int, ...]
    magnitude: float

    def __str__(self) -> str:
        return f"{self.kind} violation at {list(self.index)}: {self.magnitude:.3e}"


def _min_eigenvalue(matrix: Operator) -> float:
    hermitian = (matrix + linalg.dagger(matrix)) / 2
    return float(np.linalg.eigvalsh(hermitian)[0])


def _element_violations(
    elements: np.ndarray,
    tolerances: Tolerances,
) -> list[Violation]:
    violations = []
    for x, a in np.ndindex(*elements.shape[:2]):
        element = elements[x, a]
        deviation = linalg.hermiticity_deviation(element)
        if deviation > tolerances.hermiticity:
            violations.append(Violation("hermiticity", (x, a), deviation))
            continue
        smallest = _min_eigenvalue(element)
        if smallest < -tolerances.negativity:
            violations.append(Violation("positivity", (x, a), -smallest))
    return violations


def validate_state_assemblage(
    assemblage: StateAssemblage,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> list[Violation]:
    """Report every violated state assemblage invariant.

    Args:
        assemblage: The assemblage to check.
        tolerances: Numerical tolerances.

    Returns:
        The violations found; empty iff the assemblage is valid.
    """
    violations = _element_violations(assemblage.elements, tolerances)
    sums = assemblage.elements.sum(axis=1)
    for x in range(1, assemblage.n_inputs):
        deviation = float(np.max(np.abs(sums[x] - sums[0])))
        if deviation > tolerances.no_signalling:
            violations.append(Violation("no-signalling", (x,), deviation))
    trace_deviation = abs(complex(np.trace(sums[0])) - 1)
    if trace_deviation > tolerances.trace:
        violations.append(Violation("trace", (), trace_deviation))
    return violations


def validate_measurement_assemblage(
    assemblage: MeasurementAssemblage,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> list[Violation]:
    """Report every violated measurement assemblage invariant.

    Args:
        assemblage: The assemblage to check.
        tolerances: Numerical tolerances.

    Returns:
        The violations found; empty iff the assemblage is valid.
    """
    violations = _element_violations(assemblage.elements, tolerances)
    carrier = assemblage.carrier
    idempotence = float(np.max(np.abs(carrier @ carrier - carrier)))
    hermiticity = linalg.hermiticity_deviation(carrier)
    if max(idempotence, hermiticity) > tolerances.no_signalling:
        violations.append(Violation("carrier", (), max(idempotence, hermiticity)))
    sums = assemblage.elements.sum(axis=1)
    for x in range(assemblage.n_inputs):
        deviation = float(np.max(np.abs(sums[x] - carrier)))
        if deviation > tolerances.no_signalling:
            violations.append(Violation("normalisation", (x,), deviation))
    return violations


def require_valid(
    assemblage: StateAssemblage | MeasurementAssemblage,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> None:
    """Raise on the first invariant violation of an assemblage.

    Raises:
        NonHermitianInputError: If an element is not Hermitian.
        NegativeOperatorError: If an element is not PSD.
        NoSignallingViolationError: If a state assemblage signals or a POVM
            does not sum to the carrier.
        NonUnitTraceError: If the reduced state is not normalised.
    """
    if isinstance(assemblage, StateAssemblage):
        violations = validate_state_assemblage(assemblage, tolerances=tolerances)
    else:
        violations = validate_measurement_assemblage(assemblage, tolerances=tolerances)
    if not violations:
        return
    violation = violations[0]
    error = {
        "hermiticity": errors.NonHermitianInputError,
        "positivity": errors.NegativeOperatorError,
        "trace": errors.NonUnitTraceError,
    }.get(violation.kind, errors.NoSignallingViolationError)
    msg = "; ".join(str(item) for item in violations)
    raise error(msg)


def require_density(
    matrix: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Operator:
    """Check that an operator is a density operator.

    Returns:
        The exactly Hermitian part of the operator.

    Raises:
        NonHermitianInputError: If the operator is not Hermitian.
        NegativeOperatorError: If the operator is not PSD.
        NonUnitTraceError: If the trace deviates from one.
    """
    hermitian = linalg.require_hermitian(matrix, tolerances=tolerances)
    smallest = _min_eigenvalue(hermitian)
    if smallest < -tolerances.negativity:
        msg = f"Density operator has a negative eigenvalue {smallest:.3e}."
        raise errors.NegativeOperatorError(msg)
    trace = float(np.real(np.trace(hermitian)))
    if abs(trace - 1) > tolerances.trace:
        msg = f"Density operator has trace {trace!r}, expected 1."
        raise errors.NonUnitTraceError(msg)
    return hermitian


def reduced_state(
    assemblage: StateAssemblage,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Operator:
    """Reduced state ρ_σ = Σ_a σ_{a|x}, averaged over the inputs.

    Args:
        assemblage: State assemblage.
        tolerances: Numerical tolerances.

    Returns:
        The Hermitian average of Σ_a σ_{a|x} over x.

    Raises:
        NoSignallingViolationError: If Σ_a σ_{a|x} depends on x beyond
            `Tolerances.reduced_state`.
    """
    sums = assemblage.elements.sum(axis=1)
    deviation = float(np.max(np.abs(sums - sums[0])))
    if deviation > tolerances.reduced_state:
        msg = (
            "The reduced state depends on the input: max deviation "
            f"{deviation:.3e} exceeds {tolerances.reduced_state:.1e}."
        )
        raise errors.NoSignallingViolationError(msg)
    mean = sums.mean(axis=0)
    return (mean + linalg.dagger(mean)) / 2


def steer_from_state(
    state: BipartiteState,
    measurements: MeasurementAssemblage,
) -> StateAssemblage:
    """Assemblage prepared by measuring A of a bipartite state.

    σ_{a|x} = tr_A[(E_{a|x} ⊗ 𝕀_B) ρ_AB].

    Args:
        state: Shared bipartite state.
        measurements: POVMs acting on A.

    Returns:
        The state assemblage of B.

    Raises:
        DimensionMismatchError: If the POVMs do not act on A.
    """
    if measurements.dim != state.dim_a:
        msg = (
            f"Measurements act on dimension {measurements.dim}, "
            f"but party A has dimension {state.dim_a}."
        )
        raise errors.DimensionMismatchError(msg)
    tensor = state.matrix.reshape(state.dim_a, state.dim_b, state.dim_a, state.dim_b)
    elements = np.einsum("xaij,jbic->xabc", measurements.elements, tensor)
    return StateAssemblage((elements + linalg.dagger(elements)) / 2)


def compute_seo(
    assemblage: StateAssemblage,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> MeasurementAssemblage:
    """Steering-equivalent observable B_{a|x} = √ρ_σ⁻¹ σ_{a|x} √ρ_σ⁻¹.

    Args:
        assemblage: State assemblage.
        tolerances: Numerical tolerances.

    Returns:
        POVMs on supp(ρ_σ), with the support projector as carrier.
    """
    rho = reduced_state(assemblage, tolerances=tolerances)
    inverse_root = linalg.sqrt_pinv(rho, tolerances=tolerances)
    elements = inverse_root @ assemblage.elements @ inverse_root
    return MeasurementAssemblage(
        (elements + linalg.dagger(elements)) / 2,
        carrier=linalg.support_projector(rho, tolerances=tolerances),
    )


def assemblage_from_seo(
    measurements: MeasurementAssemblage,
    density: Operator,
    unitary: Operator,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> StateAssemblage:
    """Assemblage τ_{a|x} = √ρ U E_{a|x} U† √ρ induced by a measurement assemblage.

    Args:
        measurements: Measurement assemblage E.
        density: Reduced state ρ of the result.
        unitary: Unitary U.
        tolerances: Numerical tolerances.

    Returns:
        The induced state assemblage, whose reduced state is ρ.

    Raises:
        SupportViolationError: If supp(ρ) ⊄ supp(U 𝕀_E U†).
        DimensionMismatchError: If the operands have different dimensions.
    """
    density = require_density(density, tolerances=tolerances)
    unitary = np.asarray(unitary, dtype=np.complex128)
    if density.shape != unitary.shape or unitary.shape[0] != measurements.dim:
        msg = (
            f"Cannot combine effects of dimension {measurements.dim} with a "
            f"state of shape {density.shape} and a unitary of shape "
            f"{unitary.shape}."
        )
        raise errors.DimensionMismatchError(msg)
    rotated_carrier = unitary @ measurements.carrier @ linalg.dagger(unitary)
    deviation = linalg.support_inclusion_deviation(
        density,
        rotated_carrier,
        tolerances=tolerances,
    )
    if deviation > tolerances.support_inclusion:
        msg = (
            "The support of the state is not contained in the rotated carrier "
            f"(deviation {deviation:.3e})."
        )
        raise errors.SupportViolationError(msg)
    root = linalg.matrix_sqrt(density, tolerances=tolerances)
    operator = root @ unitary
    elements = operator @ measurements.elements @ linalg.dagger(operator)
    return StateAssemblage((elements + linalg.dagger(elements)) / 2)


def seo_inducible_assemblage(measurements: MeasurementAssemblage) -> StateAssemblage:
    """Assemblage E_{a|x}/r whose SEO is E (r = rank of the carrier)."""
    return StateAssemblage(measurements.elements / measurements.carrier_rank)
