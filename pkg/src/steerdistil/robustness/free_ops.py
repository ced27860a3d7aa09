"""Free operations of incompatibility and steering.

Incompatibility is not increased by classical pre- and post-processing with
shared randomness ω:

    E′_{a′|x′} = Σ_{ω,x,a} p(ω) p(x|x′,ω) p(a′|a,x′,ω) E_{a|x}.

Steering is not increased by the same classical processing combined with a
quantum instrument {ℰ_ω} on the trusted party:

    σ′_{a′|x′} = Σ_{ω,x,a} p(x|x′,ω) p(a′|a,x,x′,ω) ℰ_ω(σ_{a|x}).
"""
from __future__ import annotations

import typing as t
from dataclasses import dataclass

import numpy as np

from steerdistil.core import errors, linalg
from steerdistil.core.assemblage import MeasurementAssemblage, StateAssemblage
from steerdistil.core.helper import Operator

DISTRIBUTION_TOLERANCE = 1e-10
INSTRUMENT_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class FreeOpSpec:
    """Classical processing with optional instrument.

    Args:
        p_omega: p(ω), shape (n_omega,).
        p_input: p(x|x′,ω), shape (n_omega, n_inputs_out, n_inputs_in).
        p_output: p(a′|a,x,x′,ω), shape (n_omega, n_inputs_out, n_inputs_in,
            n_outputs_in, n_outputs_out). Incompatibility operations must not
            depend on x.
        instrument: Kraus operators of ℰ_ω for every ω. Required for
            steering operations only.
    """

    p_omega: np.ndarray
    p_input: np.ndarray
    p_output: np.ndarray
    instrument: t.Optional[t.Tuple[t.Tuple[Operator, ...], ...]] = None

    @property
    def n_omega(self) -> int:
        """Number of values of the shared randomness."""
        return int(self.p_omega.shape[0])

    @property
    def n_inputs_out(self) -> int:
        """Number of inputs x′ of the result."""
        return int(self.p_input.shape[1])

    @property
    def n_outputs_out(self) -> int:
        """Number of outputs a′ of the result."""
        return int(self.p_output.shape[-1])


def _check_distribution(values: np.ndarray, axis: int, name: str) -> None:
    if np.any(values < -DISTRIBUTION_TOLERANCE):
        msg = f"{name} has negative entries (min {values.min():.3e})."
        raise errors.MalformedDistributionError(msg)
    deviation = float(np.max(np.abs(values.sum(axis=axis) - 1)))
    if deviation > DISTRIBUTION_TOLERANCE:
        msg = f"{name} is not normalised (deviation {deviation:.3e})."
        raise errors.MalformedDistributionError(msg)


def validate_free_op(
    op: FreeOpSpec,
    n_inputs: int,
    n_outputs: int,
) -> None:
    """Check shapes and normalisation of the classical processing.

    Raises:
        MalformedDistributionError: On negative or unnormalised
            distributions or shapes that do not fit the input.
    """
    p_omega = np.asarray(op.p_omega, dtype=float)
    p_input = np.asarray(op.p_input, dtype=float)
    p_output = np.asarray(op.p_output, dtype=float)
    n_omega = p_omega.shape[0]
    n_inputs_out = p_input.shape[1]
    expected_input = (n_omega, n_inputs_out, n_inputs)
    expected_output = (n_omega, n_inputs_out, n_inputs, n_outputs, p_output.shape[-1])
    if (
        p_omega.ndim != 1
        or p_input.shape != expected_input
        or p_output.shape != expected_output
    ):
        msg = (
            f"Distribution shapes {p_omega.shape}, {p_input.shape}, {p_output.shape} "
            f"do not fit an assemblage with {n_inputs} inputs and {n_outputs} outputs."
        )
        raise errors.MalformedDistributionError(msg)
    _check_distribution(p_omega, 0, "p(ω)")
    _check_distribution(p_input, 2, "p(x|x′,ω)")
    _check_distribution(p_output, 4, "p(a′|a,x,x′,ω)")


def validate_instrument(
    instrument: t.Sequence[t.Sequence[Operator]],
) -> t.Tuple[int, int]:
    """Check that the maps of an instrument sum to a channel.

    Returns:
        Input and output dimension of the instrument.

    Raises:
        MalformedInstrumentError: If shapes differ or Σ_ω Σ_k K†K ≠ I.
    """
    operators = [
        np.asarray(kraus, dtype=np.complex128) for maps in instrument for kraus in maps
    ]
    if not operators:
        msg = "The instrument has no Kraus operators."
        raise errors.MalformedInstrumentError(msg)
    shape = operators[0].shape
    if any(kraus.shape != shape for kraus in operators):
        msg = "All Kraus operators of an instrument need the same shape."
        raise errors.MalformedInstrumentError(msg)
    total = sum(linalg.dagger(kraus) @ kraus for kraus in operators)
    deviation = float(np.max(np.abs(total - np.eye(shape[1]))))
    if deviation > INSTRUMENT_TOLERANCE:
        msg = f"The instrument is not trace preserving (deviation {deviation:.3e})."
        raise errors.MalformedInstrumentError(msg)
    return shape[1], shape[0]


def apply_incompatibility_free_op(
    measurements: MeasurementAssemblage,
    op: FreeOpSpec,
) -> MeasurementAssemblage:
    """Classical pre- and post-processing of a measurement assemblage.

    Raises:
        MalformedDistributionError: If the distributions are invalid or the
            output processing depends on x.
    """
    validate_free_op(op, measurements.n_inputs, measurements.n_outputs)
    p_output = np.asarray(op.p_output, dtype=float)
    x_dependence = np.max(np.abs(p_output - p_output[:, :, :1]), initial=0.0)
    if x_dependence > DISTRIBUTION_TOLERANCE:
        msg = "Incompatibility post-processing p(a′|a,x′,ω) must not depend on x."
        raise errors.MalformedDistributionError(msg)
    elements = np.einsum(
        "w,wyx,wyxab,xaij->ybij",
        np.asarray(op.p_omega, dtype=float),
        np.asarray(op.p_input, dtype=float),
        p_output,
        measurements.elements,
    )
    return MeasurementAssemblage(elements, carrier=measurements.carrier)


def apply_steering_free_op(sigma: StateAssemblage, op: FreeOpSpec) -> StateAssemblage:
    """Classical processing plus an instrument on the trusted party.

    Raises:
        MalformedDistributionError: If the distributions are invalid.
        MalformedInstrumentError: If the instrument is missing, has the wrong
            number of maps or is not trace preserving in sum.
    """
    validate_free_op(op, sigma.n_inputs, sigma.n_outputs)
    if op.instrument is None or len(op.instrument) != op.n_omega:
        msg = f"A steering operation needs one instrument map per ω ({op.n_omega})."
        raise errors.MalformedInstrumentError(msg)
    dim_in, _ = validate_instrument(op.instrument)
    if dim_in != sigma.dim:
        msg = f"Instrument acts on dimension {dim_in}, assemblage has {sigma.dim}."
        raise errors.MalformedInstrumentError(msg)
    p_input = np.asarray(op.p_input, dtype=float)
    p_output = np.asarray(op.p_output, dtype=float)
    result = 0
    for omega, maps in enumerate(op.instrument):
        kraus = np.array(maps, dtype=np.complex128)
        transformed = np.einsum(
            "kij,xajl,kml->xaim",
            kraus,
            sigma.elements,
            kraus.conj(),
        )
        result = result + np.einsum(
            "yx,yxab,xaij->ybij",
            p_input[omega],
            p_output[omega],
            transformed,
        )
    return StateAssemblage((result + linalg.dagger(result)) / 2)


def incompatibility_op_as_steering_op(op: FreeOpSpec, dim: int) -> FreeOpSpec:
    """Steering operation with ℰ_ω = p(ω)·id acting like the given processing."""
    p_omega = np.asarray(op.p_omega, dtype=float)
    instrument = tuple((np.sqrt(weight) * np.eye(dim),) for weight in p_omega)
    return FreeOpSpec(p_omega, op.p_input, op.p_output, instrument)


def lhs_from_jm_decomposition(
    parents: np.ndarray,
    eta: Operator,
    unitary: Operator,
) -> np.ndarray:
    """Hidden states √η U G_λ U† √η of a joint measurement G_λ.

    If E_{a|x} = Σ_λ D(a|x,λ) G_λ, the assemblage √η U E U† √η has the
    local hidden state model with these states.
    """
    root = linalg.matrix_sqrt(eta)
    operator = root @ np.asarray(unitary)
    return operator @ np.asarray(parents) @ linalg.dagger(operator)
