"""Tests the worked qubit-qutrit example."""
import numpy as np
import pytest
from steerdistil import catalog
from steerdistil.core import errors
from steerdistil.core.assemblage import reduced_state, validate_state_assemblage


@pytest.mark.parametrize("v", [0.0, 0.3, 1.0])
def test_example_assemblage_is_valid(v):
    sigma = catalog.example_assemblage(v)
    assert validate_state_assemblage(sigma) == []
    np.testing.assert_allclose(
        reduced_state(sigma),
        np.diag([v / 2, v / 2, 1 - v]),
        atol=1e-12,
    )


def test_example_assemblage_at_full_visibility():
    np.testing.assert_allclose(
        catalog.example_assemblage(1).elements,
        catalog.final_assemblage().elements,
        atol=1e-12,
    )


@pytest.mark.parametrize("v", [-0.1, 1.5])
def test_visibility_out_of_range(v):
    with pytest.raises(errors.ValidationError, match="Visibility"):
        catalog.example_state(v)


def test_example_filter_is_the_qubit_projector():
    np.testing.assert_array_equal(catalog.example_filter().operator, np.diag([1, 1, 0]))


def test_pauli_measurements():
    pauli = catalog.pauli_measurements().elements
    np.testing.assert_array_equal(pauli[0, 0], np.diag([1, 0]))
    np.testing.assert_allclose(pauli[1, 0], np.full((2, 2), 0.5))
    np.testing.assert_allclose(pauli.sum(axis=1), np.broadcast_to(np.eye(2), (2, 2, 2)))
