"""Noise models of the robustness measures.

A noise model is the set of assemblages ω the input may be mixed with. The
built-in models are all state assemblages, the state assemblages sharing the
reduced state of the input, and all measurement assemblages. Custom models
are given by linear constraints Σ_{x,a} tr(F_{a|x} ω_{a|x}) = g on top of
the general model of their kind, or by a single fixed assemblage.
"""
from __future__ import annotations

import typing as t
from dataclasses import dataclass
from enum import Enum

import numpy as np

from steerdistil.core import errors
from steerdistil.core.assemblage import MeasurementAssemblage, StateAssemblage
from steerdistil.core.helper import AssemblageKind, OperatorFamily, frozen


class NoiseKind(Enum):
    """Kind of a noise model."""

    GENERAL_STATE = "general-state"
    CONSISTENT_STATE = "consistent-state"
    GENERAL_MEASUREMENT = "general-measurement"
    CUSTOM = "custom"


@dataclass(frozen=True, eq=False)
class LinearConstraint:
    """Constraint Σ_{x,a} tr(F_{a|x} ω_{a|x}) = value on normalised noise.

    Args:
        coefficients: Hermitian F of shape (n_inputs, n_outputs, dim, dim).
        value: Right hand side g.
    """

    coefficients: OperatorFamily
    value: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", frozen(self.coefficients))


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Set of admissible noise assemblages.

    Use the constructors instead of instantiating directly.

    Args:
        kind: The model kind.
        target: Whether the noise is a state or a measurement assemblage.
        constraints: Linear constraints of a custom model.
        fixed_noise: The only admissible noise of a fixed custom model.
    """

    kind: NoiseKind
    target: AssemblageKind
    constraints: t.Tuple[LinearConstraint, ...] = ()
    fixed_noise: t.Optional[OperatorFamily] = None

    @staticmethod
    def general_state() -> NoiseModel:
        """All state assemblages."""
        return NoiseModel(NoiseKind.GENERAL_STATE, AssemblageKind.STATE)

    @staticmethod
    def consistent_state() -> NoiseModel:
        """State assemblages with the reduced state of the input."""
        return NoiseModel(NoiseKind.CONSISTENT_STATE, AssemblageKind.STATE)

    @staticmethod
    def general_measurement() -> NoiseModel:
        """All measurement assemblages on the carrier of the input."""
        return NoiseModel(NoiseKind.GENERAL_MEASUREMENT, AssemblageKind.MEASUREMENT)

    @staticmethod
    def custom(
        target: AssemblageKind,
        constraints: t.Iterable[object],
    ) -> NoiseModel:
        """General model of the given kind restricted by linear constraints.

        Raises:
            UnrepresentableNoiseModelError: If a constraint is not a
                `LinearConstraint`.
        """
        constraints = tuple(constraints)
        for index, constraint in enumerate(constraints):
            if not isinstance(constraint, LinearConstraint):
                msg = (
                    f"Constraint {index} of type {type(constraint).__name__} is "
                    "not linear in the noise; only LinearConstraint is supported."
                )
                raise errors.UnrepresentableNoiseModelError(msg)
        return NoiseModel(NoiseKind.CUSTOM, target, constraints)

    @staticmethod
    def fixed(noise: t.Union[StateAssemblage, MeasurementAssemblage]) -> NoiseModel:
        """Model admitting exactly one noise assemblage."""
        target = (
            AssemblageKind.STATE
            if isinstance(noise, StateAssemblage)
            else AssemblageKind.MEASUREMENT
        )
        return NoiseModel(NoiseKind.CUSTOM, target, (), noise.elements)

    def check_applicable(self, shape: t.Tuple[int, ...], kind: AssemblageKind) -> None:
        """Check that the model fits an input of the given shape and kind.

        Raises:
            UnrepresentableNoiseModelError: On a kind or shape mismatch.
        """
        if kind is not self.target:
            msg = (
                f"A {self.target.value} noise model cannot be applied to a "
                f"{kind.value} assemblage."
            )
            raise errors.UnrepresentableNoiseModelError(msg)
        shapes = [constraint.coefficients.shape for constraint in self.constraints]
        if self.fixed_noise is not None:
            shapes.append(self.fixed_noise.shape)
        for other in shapes:
            if tuple(other) != tuple(shape):
                msg = (
                    f"Noise model data of shape {other} "
                    f"does not match the input {shape}."
                )
                raise errors.UnrepresentableNoiseModelError(msg)


def is_seo_included(measurement_model: NoiseModel, state_model: NoiseModel) -> bool:
    """Whether a pair of noise models is known to satisfy the SEO inclusion.

    The inclusion says that the SEO of every admissible state noise, seen
    through √η U · U† √η, is an admissible measurement noise. It holds for
    general measurement noise paired with general or consistent state noise.
    Custom pairs are never verified and report False.
    """
    if measurement_model.kind is not NoiseKind.GENERAL_MEASUREMENT:
        return False
    return state_model.kind in (NoiseKind.GENERAL_STATE, NoiseKind.CONSISTENT_STATE)


def white_noise_constraint(
    n_inputs: int,
    n_outputs: int,
    dim: int,
    input_index: int,
    output_index: int,
) -> LinearConstraint:
    """Constraint fixing tr ω_{a|x} to 1/n_outputs for one (x, a) pair."""
    coefficients = np.zeros((n_inputs, n_outputs, dim, dim), dtype=np.complex128)
    coefficients[input_index, output_index] = np.eye(dim)
    return LinearConstraint(coefficients, 1 / n_outputs)
