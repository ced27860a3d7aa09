"""Tests the free operations of incompatibility and steering."""
import numpy as np
import pytest
from steerdistil import catalog, sampling
from steerdistil.core import errors, linalg
from steerdistil.core.assemblage import (
    assemblage_from_seo,
    reduced_state,
    seo_inducible_assemblage,
    validate_measurement_assemblage,
    validate_state_assemblage,
)
from steerdistil.robustness import (
    FreeOpSpec,
    apply_incompatibility_free_op,
    apply_steering_free_op,
    incompatibility_op_as_steering_op,
    incompatibility_robustness,
    lhs_from_jm_decomposition,
    steering_robustness,
)
from steerdistil.robustness.free_ops import validate_instrument


def _relabelling():
    # Swap the inputs and flip the outcomes of the second one.
    p_input = np.array([[[0.0, 1.0], [1.0, 0.0]]])
    p_output = np.zeros((1, 2, 2, 2, 2))
    p_output[0, 0] = np.eye(2)
    p_output[0, 1] = np.eye(2)[::-1]
    return FreeOpSpec(np.ones(1), p_input, p_output)


def test_relabelling():
    pauli = catalog.pauli_measurements()
    relabelled = apply_incompatibility_free_op(pauli, _relabelling())
    np.testing.assert_allclose(relabelled.elements[0], pauli.elements[1])
    np.testing.assert_allclose(relabelled.elements[1], pauli.elements[0][::-1])


def test_results_are_valid_assemblages():
    rng = sampling.derive_rng(0, "free-ops")
    measurements = sampling.random_measurement_assemblage(3, 2, 3, rng)
    op = sampling.random_free_op(2, 3, rng, n_inputs_out=3, n_outputs_out=2)
    processed = apply_incompatibility_free_op(measurements, op)
    assert processed.elements.shape == (3, 2, 3, 3)
    assert validate_measurement_assemblage(processed) == []

    sigma = sampling.random_state_assemblage(3, 2, 3, rng)
    op = sampling.random_free_op(
        2,
        3,
        rng,
        n_omega=3,
        instrument_dim=3,
        input_dependent=True,
    )
    transformed = apply_steering_free_op(sigma, op)
    assert validate_state_assemblage(transformed) == []


def test_output_processing_may_not_depend_on_input():
    rng = sampling.derive_rng(1, "free-ops")
    op = sampling.random_free_op(2, 2, rng, input_dependent=True)
    with pytest.raises(errors.MalformedDistributionError, match="must not depend on x"):
        apply_incompatibility_free_op(catalog.pauli_measurements(), op)


@pytest.mark.parametrize(
    ("p_omega", "match"),
    [
        (np.array([0.5, 0.6]), "not normalised"),
        (np.array([1.5, -0.5]), "negative"),
    ],
)
def test_malformed_shared_randomness(p_omega, match):
    op = sampling.random_free_op(2, 2, sampling.derive_rng(2, "free-ops"))
    malformed = FreeOpSpec(p_omega, op.p_input, op.p_output)
    with pytest.raises(errors.MalformedDistributionError, match=match):
        apply_incompatibility_free_op(catalog.pauli_measurements(), malformed)


def test_shape_mismatch():
    op = sampling.random_free_op(3, 2, sampling.derive_rng(3, "free-ops"))
    with pytest.raises(errors.MalformedDistributionError, match="do not fit"):
        apply_incompatibility_free_op(catalog.pauli_measurements(), op)


def test_steering_op_needs_instrument():
    op = sampling.random_free_op(2, 2, sampling.derive_rng(4, "free-ops"))
    with pytest.raises(errors.MalformedInstrumentError, match="one instrument map"):
        apply_steering_free_op(catalog.final_assemblage(), op)


def test_instrument_must_preserve_trace():
    with pytest.raises(errors.MalformedInstrumentError, match="not trace preserving"):
        validate_instrument(((np.eye(2),), (np.eye(2),)))
    with pytest.raises(errors.MalformedInstrumentError, match="same shape"):
        validate_instrument(((np.eye(2),), (np.eye(3),)))
    with pytest.raises(errors.MalformedInstrumentError, match="no Kraus"):
        validate_instrument(())


def test_instrument_dimension_must_match():
    rng = sampling.derive_rng(5, "free-ops")
    op = sampling.random_free_op(2, 2, rng, instrument_dim=2)
    with pytest.raises(errors.MalformedInstrumentError, match="dimension"):
        apply_steering_free_op(catalog.final_assemblage(), op)


def test_incompatibility_op_commutes_with_steering():
    rng = sampling.derive_rng(6, "free-ops")
    measurements = sampling.random_measurement_assemblage(2, 2, 2, rng)
    density = sampling.random_density(2, rng)
    op = sampling.random_free_op(2, 2, rng, n_omega=3)
    processed = apply_incompatibility_free_op(measurements, op)
    sigma = assemblage_from_seo(measurements, density, np.eye(2))
    steering_op = incompatibility_op_as_steering_op(op, 2)
    transformed = apply_steering_free_op(sigma, steering_op)
    expected = assemblage_from_seo(processed, density, np.eye(2))
    np.testing.assert_allclose(transformed.elements, expected.elements, atol=1e-12)
    np.testing.assert_allclose(reduced_state(transformed), density, atol=1e-12)


def test_lhs_from_joint_measurement():
    rng = sampling.derive_rng(7, "free-ops")
    parents = sampling.random_povm(2, 4, rng)
    strategies_table = np.zeros((4, 2, 2))
    responses = [(0, 0), (0, 1), (1, 0), (1, 1)]
    for index, (first, second) in enumerate(responses):
        strategies_table[index, 0, first] = 1
        strategies_table[index, 1, second] = 1
    measurements = np.einsum("lxa,lij->xaij", strategies_table, parents)
    eta = sampling.random_density(2, rng)
    unitary = linalg.haar_unitary(2, rng)
    states = lhs_from_jm_decomposition(parents, eta, unitary)
    root = linalg.matrix_sqrt(eta)
    np.testing.assert_allclose(
        np.einsum("lxa,lij->xaij", strategies_table, states),
        root @ unitary @ measurements @ linalg.dagger(unitary) @ root,
        atol=1e-12,
    )
    assert np.linalg.eigvalsh(states).min() >= -1e-12


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(4))
def test_free_ops_do_not_increase_robustness(seed):
    rng = sampling.derive_rng(seed, "monotone")
    measurements = sampling.random_measurement_assemblage(2, 2, 2, rng, sharp=True)
    op = sampling.random_free_op(2, 2, rng)
    before = incompatibility_robustness(measurements).value
    processed = apply_incompatibility_free_op(measurements, op)
    after = incompatibility_robustness(processed).value
    assert after <= before + 1e-6

    sigma = seo_inducible_assemblage(measurements)
    steering_op = sampling.random_free_op(
        2,
        2,
        rng,
        instrument_dim=2,
        input_dependent=True,
    )
    before = steering_robustness(sigma).value
    after = steering_robustness(apply_steering_free_op(sigma, steering_op)).value
    assert after <= before + 1e-6
