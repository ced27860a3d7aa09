"""Tests the robustness measures and the membership tests."""
import math

import numpy as np
import pytest
from steerdistil import catalog, sampling
from steerdistil.core import linalg
from steerdistil.core.assemblage import (
    MeasurementAssemblage,
    compute_seo,
    steer_from_state,
)
from steerdistil.core.filters import apply_filter
from steerdistil.robustness import (
    consistent_steering_robustness,
    convexity_gap,
    distillation_gap,
    enumerate_deterministic_strategies,
    incompatibility_robustness,
    jm_membership,
    lhs_membership,
    steering_robustness,
)


def test_pauli_robustness_is_bracketed():
    # Feasible primal point and dual point with the same objective 4 − 2√2.
    pauli = catalog.pauli_measurements().elements
    strategies = enumerate_deterministic_strategies(2, 2)
    scale = 4 - 2 * math.sqrt(2)
    signs = 1 - 2 * strategies.responses
    parents = np.array(
        [
            scale
            / 4
            * (
                np.eye(2)
                + (z * catalog.PAULI_Z + x * catalog.PAULI_X) / math.sqrt(2)
            )
            for z, x in signs
        ],
    )
    assert min(np.linalg.eigvalsh(parents).min(axis=1)) >= -1e-12
    np.testing.assert_allclose(parents.sum(axis=0), scale * np.eye(2), atol=1e-12)
    slack = np.einsum("lxa,lij->xaij", strategies.table, parents) - pauli
    assert np.linalg.eigvalsh(slack).min() >= -1e-12

    dual = pauli / (2 + math.sqrt(2))
    bound = np.eye(2) / 2
    for response in strategies.responses:
        combined = sum(dual[x, a] for x, a in enumerate(response))
        assert np.linalg.eigvalsh(bound - combined).min() >= -1e-12
    value = np.einsum("xaij,xaji->", dual, pauli).real
    assert value == pytest.approx(scale)
    assert scale - 1 == pytest.approx(catalog.PAULI_ROBUSTNESS)


def test_pauli_incompatibility_robustness():
    result = incompatibility_robustness(catalog.pauli_measurements())
    assert result.value == pytest.approx(catalog.PAULI_ROBUSTNESS, abs=1e-6)
    np.testing.assert_allclose(
        result.recombined(),
        result.mixture(catalog.pauli_measurements().elements),
        atol=1e-6,
    )
    assert np.linalg.eigvalsh(result.decomposition).min() >= -1e-7


def test_final_assemblage_robustness():
    sigma = catalog.final_assemblage()
    assert steering_robustness(sigma).value == pytest.approx(
        catalog.PAULI_ROBUSTNESS,
        abs=1e-6,
    )
    assert consistent_steering_robustness(sigma).value == pytest.approx(
        catalog.PAULI_ROBUSTNESS,
        abs=1e-6,
    )


@pytest.mark.parametrize("v", [0.25, 0.5, 0.75])
def test_distillation_raises_steering_robustness(v):
    sigma = catalog.example_assemblage(v)
    gap = distillation_gap(sigma)
    assert gap.steering <= v * catalog.PAULI_ROBUSTNESS + 1e-6
    assert gap.consistent_steering == pytest.approx(catalog.PAULI_ROBUSTNESS, abs=1e-6)
    assert gap.incompatibility == pytest.approx(catalog.PAULI_ROBUSTNESS, abs=1e-6)
    assert gap.distillable_gap >= (1 - v) * catalog.PAULI_ROBUSTNESS - 1e-6
    assert gap.consistency_gap <= 1e-5
    distilled = apply_filter(sigma, catalog.example_filter()).output
    assert steering_robustness(distilled).value == pytest.approx(
        gap.incompatibility,
        abs=1e-6,
    )


@pytest.mark.parametrize("seed", range(4))
def test_consistent_robustness_is_seo_incompatibility(seed):
    rng = sampling.derive_rng(seed, "consistent")
    dim = 2 + seed % 2
    sigma = sampling.random_state_assemblage(dim, 2, 2, rng, sharp=seed % 2 == 0)
    consistent = consistent_steering_robustness(sigma).value
    seo = incompatibility_robustness(compute_seo(sigma)).value
    assert consistent == pytest.approx(seo, abs=1e-5)
    assert steering_robustness(sigma).value <= seo + 1e-6


def test_witness_reproduces_value():
    sigma = catalog.final_assemblage()
    result = steering_robustness(sigma)
    pairing = np.einsum("xaij,xaji->", result.witness, sigma.elements).real
    assert pairing == pytest.approx(1 + result.value, abs=1e-6)


@pytest.mark.parametrize("seed", range(3))
def test_unitary_invariance(seed):
    rng = sampling.derive_rng(seed, "invariance")
    measurements = sampling.random_measurement_assemblage(2, 2, 2, rng, sharp=True)
    unitary = linalg.haar_unitary(2, rng)
    rotated = MeasurementAssemblage(
        unitary @ measurements.elements @ linalg.dagger(unitary),
    )
    assert incompatibility_robustness(rotated).value == pytest.approx(
        incompatibility_robustness(measurements).value,
        abs=1e-6,
    )
    sigma = sampling.random_state_assemblage(2, 2, 2, rng)
    rotated_sigma = apply_filter(sigma, unitary).output
    assert steering_robustness(rotated_sigma).value == pytest.approx(
        steering_robustness(sigma).value,
        abs=1e-6,
    )


@pytest.mark.parametrize("seed", range(3))
def test_product_states_are_unsteerable(seed):
    rng = sampling.derive_rng(seed, "product")
    state = sampling.random_bipartite_state(2, 2, rng, product=True)
    measurements = sampling.random_measurement_assemblage(2, 2, 2, rng, sharp=True)
    membership = lhs_membership(steer_from_state(state, measurements))
    assert membership.member
    assert membership.robustness.value <= 1e-7
    assert membership.decomposition is not None


def test_lhs_assemblage_is_member():
    sigma = sampling.random_lhs_assemblage(3, 2, 3, sampling.derive_rng(1, "lhs"))
    membership = lhs_membership(sigma)
    assert membership.member
    np.testing.assert_allclose(
        np.einsum(
            "lxa,lij->xaij",
            membership.robustness.strategies.table,
            membership.decomposition,
        ),
        sigma.elements,
        atol=1e-6,
    )


def test_pauli_is_not_jointly_measurable():
    membership = jm_membership(catalog.pauli_measurements())
    assert not membership.member
    assert membership.decomposition is None


def test_commuting_measurements_are_jointly_measurable():
    measurements = catalog.sharp_measurements(
        np.diag([1.0, -1.0, 1.0]),
        np.diag([1.0, 1.0, -1.0]),
    )
    assert jm_membership(measurements).member


def test_robustness_on_rank_deficient_carrier():
    measurements = MeasurementAssemblage(
        catalog.embed(catalog.pauli_measurements().elements, 3),
        carrier=np.diag([1.0, 1.0, 0.0]),
    )
    result = incompatibility_robustness(measurements)
    assert result.value == pytest.approx(catalog.PAULI_ROBUSTNESS, abs=1e-6)
    assert result.optimal_noise.shape == (2, 2, 3, 3)
    np.testing.assert_allclose(result.optimal_noise[..., 2, :], 0, atol=1e-12)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_incompatibility_robustness_is_convex(seed):
    rng = sampling.derive_rng(seed, "convexity")
    first = sampling.random_measurement_assemblage(2, 2, 2, rng, sharp=True)
    second = sampling.random_measurement_assemblage(2, 2, 2, rng, sharp=True)
    assert convexity_gap(first, second, rng.uniform()) >= -1e-6
