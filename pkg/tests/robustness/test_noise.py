"""Tests the noise models and custom robustness programs."""
import math

import numpy as np
import pytest
from steerdistil import catalog
from steerdistil.core import errors
from steerdistil.core.assemblage import MeasurementAssemblage
from steerdistil.core.helper import AssemblageKind
from steerdistil.robustness import (
    LinearConstraint,
    NoiseKind,
    NoiseModel,
    is_seo_included,
    robustness_with_noise_model,
)
from steerdistil.robustness.noise import white_noise_constraint


def test_built_in_models():
    assert NoiseModel.general_state().target is AssemblageKind.STATE
    assert NoiseModel.consistent_state().kind is NoiseKind.CONSISTENT_STATE
    assert NoiseModel.general_measurement().target is AssemblageKind.MEASUREMENT


def test_custom_rejects_nonlinear_constraint():
    with pytest.raises(errors.UnrepresentableNoiseModelError, match="Constraint 1"):
        NoiseModel.custom(
            AssemblageKind.STATE,
            [white_noise_constraint(2, 2, 3, 0, 0), lambda noise: noise],
        )


def test_kind_mismatch():
    pauli = catalog.pauli_measurements()
    with pytest.raises(
        errors.UnrepresentableNoiseModelError,
        match="cannot be applied",
    ):
        robustness_with_noise_model(pauli, NoiseModel.general_state())


def test_shape_mismatch():
    constraint = white_noise_constraint(2, 2, 2, 0, 0)
    model = NoiseModel.custom(AssemblageKind.STATE, [constraint])
    with pytest.raises(errors.UnrepresentableNoiseModelError, match="does not match"):
        model.check_applicable((2, 2, 3, 3), AssemblageKind.STATE)


def test_constraint_coefficients_are_frozen():
    constraint = white_noise_constraint(2, 2, 2, 1, 0)
    assert constraint.value == pytest.approx(0.5)
    with pytest.raises(ValueError):
        constraint.coefficients[0, 0, 0, 0] = 1


@pytest.mark.parametrize(
    ("measurement_model", "state_model", "expected"),
    [
        (NoiseModel.general_measurement(), NoiseModel.general_state(), True),
        (NoiseModel.general_measurement(), NoiseModel.consistent_state(), True),
        (NoiseModel.general_state(), NoiseModel.general_state(), False),
        (
            NoiseModel.fixed(catalog.pauli_measurements()),
            NoiseModel.general_state(),
            False,
        ),
    ],
)
def test_seo_inclusion(measurement_model, state_model, expected):
    assert is_seo_included(measurement_model, state_model) is expected


def test_white_noise_robustness_of_pauli():
    white = MeasurementAssemblage(np.broadcast_to(np.eye(2) / 2, (2, 2, 2, 2)))
    model = NoiseModel.fixed(white)
    result = robustness_with_noise_model(catalog.pauli_measurements(), model)
    assert result.value == pytest.approx(catalog.PAULI_WHITE_NOISE_ROBUSTNESS, abs=1e-6)
    np.testing.assert_allclose(result.optimal_noise, white.elements)


def test_unconstrained_custom_measurement_model_is_ir():
    model = NoiseModel.custom(AssemblageKind.MEASUREMENT, [])
    result = robustness_with_noise_model(catalog.pauli_measurements(), model)
    assert result.value == pytest.approx(catalog.PAULI_ROBUSTNESS, abs=1e-6)


def test_unconstrained_custom_state_model_is_sr():
    sigma = catalog.final_assemblage()
    compressed, _ = sigma.compressed()
    model = NoiseModel.custom(AssemblageKind.STATE, [])
    custom = robustness_with_noise_model(compressed, model)
    general = robustness_with_noise_model(compressed, NoiseModel.general_state())
    assert custom.value == pytest.approx(general.value, abs=1e-6)


def test_constraints_restrict_the_noise():
    sigma, _ = catalog.final_assemblage().compressed()
    constraints = [
        white_noise_constraint(2, 2, 2, x, a) for x in range(2) for a in range(2)
    ]
    constrained = robustness_with_noise_model(
        sigma,
        NoiseModel.custom(AssemblageKind.STATE, constraints),
    )
    general = robustness_with_noise_model(sigma, NoiseModel.general_state())
    assert constrained.value >= general.value - 1e-7
    traces = np.trace(constrained.optimal_noise, axis1=-2, axis2=-1).real
    np.testing.assert_allclose(traces, 0.5, atol=1e-6)


def test_linear_constraint_value():
    coefficients = np.zeros((1, 2, 2, 2))
    constraint = LinearConstraint(coefficients, math.pi)
    assert constraint.value == math.pi
