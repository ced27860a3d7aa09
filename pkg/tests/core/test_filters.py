"""Tests the single Kraus filters and their synthesis."""
import dataclasses

import numpy as np
import pytest
from steerdistil import catalog, sampling
from steerdistil.core import errors, linalg, ordering
from steerdistil.core.assemblage import StateAssemblage, reduced_state
from steerdistil.core.filters import (
    FilterKraus,
    apply_filter,
    max_success_probability,
    synthesize_filter,
)
from steerdistil.core.ordering import witness_from_filter


def test_from_operator_rejects_expansion():
    with pytest.raises(errors.ContractionViolationError, match="not a contraction"):
        FilterKraus.from_operator(1.1 * np.eye(2))


def test_from_operator_rejects_non_square():
    with pytest.raises(errors.DimensionMismatchError):
        FilterKraus.from_operator(np.ones((2, 3)))


def test_from_operator_slack():
    kraus = FilterKraus.from_operator(np.diag([0.5, 1.0]))
    assert kraus.contraction_slack == pytest.approx(0.0, abs=1e-15)
    half = FilterKraus.from_operator(0.5 * np.eye(2))
    assert half.contraction_slack == pytest.approx(0.75)


def test_compose_applies_other_first():
    first = FilterKraus.from_operator(np.array([[0, 1], [0, 0]]))
    second = FilterKraus.projector(np.eye(2)[:, :1])
    np.testing.assert_allclose(second.compose(first).operator, [[0, 1], [0, 0]])


@pytest.mark.parametrize("v", [0.1, 0.5, 1.0])
def test_example_filter(v):
    outcome = apply_filter(catalog.example_assemblage(v), catalog.example_filter())
    assert outcome.p_succ == pytest.approx(v, abs=1e-12)
    np.testing.assert_allclose(
        outcome.output.elements,
        catalog.final_assemblage().elements,
        atol=1e-12,
        rtol=0,
    )


def test_identity_filter_is_trivial():
    sigma = catalog.example_assemblage(0.7)
    outcome = apply_filter(sigma, FilterKraus.identity(3))
    assert outcome.p_succ == pytest.approx(1)
    np.testing.assert_allclose(outcome.output.elements, sigma.elements, atol=1e-15)


def test_vanishing_success_probability():
    sigma = catalog.final_assemblage()
    with pytest.raises(errors.VanishingSuccessProbabilityError):
        apply_filter(sigma, FilterKraus.projector(np.eye(3)[:, 2:]))


def test_filter_dimension_mismatch():
    with pytest.raises(errors.DimensionMismatchError, match="cannot act"):
        apply_filter(catalog.final_assemblage(), FilterKraus.identity(2))


def test_plain_operator_is_validated():
    with pytest.raises(errors.ContractionViolationError):
        apply_filter(catalog.final_assemblage(), 2 * np.eye(3))


@pytest.mark.parametrize("v", [0.2, 0.6, 1.0])
def test_synthesize_example_filter(v):
    sigma = catalog.example_assemblage(v)
    tau = catalog.final_assemblage()
    kraus = synthesize_filter(sigma, tau, np.eye(3))
    outcome = apply_filter(sigma, kraus)
    assert outcome.p_succ == pytest.approx(v, abs=1e-10)
    np.testing.assert_allclose(outcome.output.elements, tau.elements, atol=1e-10)


@pytest.mark.parametrize("seed", range(8))
def test_synthesized_filter_reproduces_target(seed):
    rng = np.random.default_rng(seed)
    dim = 2 + seed % 2
    sigma = sampling.random_state_assemblage(dim, 2, 2, rng)
    kraus = sampling.random_filter(dim, rng, rank=dim - seed % 2)
    applied = apply_filter(sigma, kraus)
    unitary = witness_from_filter(sigma, kraus)
    synthesized = synthesize_filter(sigma, applied.output, unitary)
    outcome = apply_filter(sigma, synthesized)
    np.testing.assert_allclose(
        outcome.output.elements,
        applied.output.elements,
        atol=1e-8,
    )
    assert outcome.p_succ >= applied.p_succ - 1e-9
    assert np.linalg.norm(synthesized.operator, 2) <= 1 + 1e-12


def test_synthesize_rejects_rank_increase():
    sigma = catalog.final_assemblage()
    tau = catalog.example_assemblage(0.5)
    with pytest.raises(errors.SupportViolationError, match="raise the rank"):
        synthesize_filter(sigma, tau, np.eye(3))


def test_synthesize_rejects_wrong_unitary():
    sigma = catalog.example_assemblage(0.5)
    tau = catalog.final_assemblage()
    hadamard = np.eye(3, dtype=complex)
    hadamard[:2, :2] = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    with pytest.raises(errors.InvalidWitnessError, match="residual"):
        synthesize_filter(sigma, tau, hadamard)


def test_synthesize_rejects_support_mismatch():
    sigma = catalog.final_assemblage()
    swap = np.eye(3)[:, [2, 1, 0]]
    with pytest.raises(errors.SupportViolationError, match="rotated support"):
        synthesize_filter(sigma, sigma, swap)


def test_max_success_probability_empty():
    sigma = catalog.final_assemblage()
    with pytest.raises(errors.EmptyWitnessListError):
        max_success_probability(sigma, sigma, [])


def test_max_success_probability_prefers_first_on_ties():
    sigma = catalog.example_assemblage(0.4)
    tau = catalog.final_assemblage()
    phase = np.diag([1, 1, -1]).astype(complex)
    probability, unitary = max_success_probability(sigma, tau, [np.eye(3), phase])
    assert probability == pytest.approx(0.4)
    np.testing.assert_allclose(unitary, np.eye(3))


def test_max_success_probability_picks_best():
    # With a rank one target every unitary keeping |0⟩ inside the first
    # two levels is a witness; they differ in the weight of ρ_σ they keep.
    rho_sigma = np.diag([0.6, 0.3, 0.1])
    observable = np.diag([1.0, 1.0, -1.0])
    measurements = catalog.sharp_measurements(observable, observable)
    root = linalg.matrix_sqrt(rho_sigma)
    sigma = StateAssemblage(root @ measurements.elements @ root)
    rho_tau = np.diag([1.0, 0.0, 0.0])
    tau = StateAssemblage(rho_tau @ measurements.elements @ rho_tau)
    swap = np.eye(3)[:, [1, 0, 2]]
    assert np.allclose(reduced_state(tau), rho_tau)
    probability, unitary = max_success_probability(sigma, tau, [swap, np.eye(3)])
    assert probability == pytest.approx(0.6)
    np.testing.assert_allclose(unitary, np.eye(3))


def test_max_success_probability_rejects_non_witness():
    sigma = catalog.final_assemblage()
    swap = np.eye(3)[:, [2, 1, 0]]
    with pytest.raises(errors.InvalidWitnessError, match="Witness 1"):
        max_success_probability(sigma, sigma, [np.eye(3), swap])


def test_synthesis_rejects_expanding_filter(monkeypatch):
    sigma = catalog.example_assemblage(0.5)
    tau = catalog.final_assemblage()
    verify = ordering.verify_order_witness

    def understated(*args, **kwargs):
        witness = verify(*args, **kwargs)
        return dataclasses.replace(witness, lambda_opt=witness.lambda_opt / 4)

    monkeypatch.setattr(ordering, "verify_order_witness", understated)
    with pytest.raises(errors.ContractionViolationError, match="not a contraction"):
        synthesize_filter(sigma, tau, np.eye(3))
