"""Seeded random instances.

Every generator takes a `numpy.random.Generator`. Use `derive_rng` to get
independent, reproducible streams from a single seed.
"""
from __future__ import annotations

import typing as t
import zlib

import numpy as np

from steerdistil.core import linalg
from steerdistil.core.assemblage import (
    BipartiteState,
    MeasurementAssemblage,
    StateAssemblage,
    assemblage_from_seo,
)
from steerdistil.core.filters import FilterKraus
from steerdistil.core.helper import Operator
from steerdistil.robustness.free_ops import FreeOpSpec
from steerdistil.robustness.strategies import enumerate_deterministic_strategies


def derive_rng(seed: int, stream: str, index: int = 0) -> np.random.Generator:
    """Generator for the named stream and index under a seed."""
    return np.random.default_rng([seed, zlib.crc32(stream.encode("utf-8")), index])


def _ginibre(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_density(
    dim: int,
    rng: np.random.Generator,
    rank: t.Optional[int] = None,
) -> Operator:
    """Density operator from the induced measure of the given rank."""
    factor = _ginibre(dim, dim if rank is None else rank, rng)
    density = factor @ linalg.dagger(factor)
    return density / np.real(np.trace(density))


def random_povm(
    dim: int,
    n_outputs: int,
    rng: np.random.Generator,
    *,
    sharp: bool = False,
) -> np.ndarray:
    """Random POVM with n_outputs effects.

    Sharp POVMs project onto groups of vectors of a Haar random basis
    (vector j goes to outcome j mod n_outputs). Otherwise the effects are
    Ginibre operators normalised by their sum.
    """
    if sharp:
        basis = linalg.haar_unitary(dim, rng)
        effects = np.zeros((n_outputs, dim, dim), dtype=np.complex128)
        for index in range(dim):
            vector = basis[:, index]
            effects[index % n_outputs] += np.outer(vector, vector.conj())
        return effects
    factors = np.array([_ginibre(dim, dim, rng) for _ in range(n_outputs)])
    effects = factors @ linalg.dagger(factors)
    inverse_root = linalg.sqrt_pinv(effects.sum(axis=0))
    effects = inverse_root @ effects @ inverse_root
    return (effects + linalg.dagger(effects)) / 2


def random_measurement_assemblage(
    dim: int,
    n_inputs: int,
    n_outputs: int,
    rng: np.random.Generator,
    *,
    sharp: bool = False,
) -> MeasurementAssemblage:
    """One independent random POVM per input."""
    return MeasurementAssemblage(
        [random_povm(dim, n_outputs, rng, sharp=sharp) for _ in range(n_inputs)],
    )


def random_state_assemblage(
    dim: int,
    n_inputs: int,
    n_outputs: int,
    rng: np.random.Generator,
    *,
    rank: t.Optional[int] = None,
    sharp: bool = False,
) -> StateAssemblage:
    """Assemblage √ρ E √ρ of a random density and random POVMs."""
    measurements = random_measurement_assemblage(
        dim,
        n_inputs,
        n_outputs,
        rng,
        sharp=sharp,
    )
    return assemblage_from_seo(
        measurements,
        random_density(dim, rng, rank),
        np.eye(dim),
    )


def random_lhs_assemblage(
    dim: int,
    n_inputs: int,
    n_outputs: int,
    rng: np.random.Generator,
) -> StateAssemblage:
    """Assemblage with a local hidden state model over all deterministic strategies."""
    strategies = enumerate_deterministic_strategies(n_inputs, n_outputs)
    weights = rng.dirichlet(np.ones(len(strategies)))
    states = np.array([random_density(dim, rng) for _ in range(len(strategies))])
    hidden = weights[:, None, None] * states
    return StateAssemblage(np.einsum("lxa,lij->xaij", strategies.table, hidden))


def random_bipartite_state(
    dim_a: int,
    dim_b: int,
    rng: np.random.Generator,
    *,
    product: bool = False,
) -> BipartiteState:
    """Random product state, or Haar random pure state (entangled almost surely)."""
    if product:
        matrix = np.kron(random_density(dim_a, rng), random_density(dim_b, rng))
    else:
        vector = linalg.haar_unitary(dim_a * dim_b, rng)[:, 0]
        matrix = np.outer(vector, vector.conj())
    return BipartiteState(matrix, dim_a=dim_a, dim_b=dim_b)


def random_filter(
    dim: int,
    rng: np.random.Generator,
    *,
    rank: t.Optional[int] = None,
) -> FilterKraus:
    """Random contraction K with largest singular value in [2/3, 1]."""
    factor = _ginibre(dim, dim, rng)
    if rank is not None:
        factor = factor @ linalg.support_projector(random_density(dim, rng, rank))
    largest = float(np.linalg.norm(factor, 2))
    return FilterKraus.from_operator(factor / (largest * rng.uniform(1.0, 1.5)))


def _conditional(shape: t.Tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """Dirichlet distributed conditional distributions over the last axis."""
    return rng.dirichlet(np.ones(shape[-1]), size=shape[:-1])


def random_free_op(
    n_inputs: int,
    n_outputs: int,
    rng: np.random.Generator,
    *,
    n_inputs_out: t.Optional[int] = None,
    n_outputs_out: t.Optional[int] = None,
    n_omega: int = 2,
    instrument_dim: t.Optional[int] = None,
    input_dependent: bool = False,
) -> FreeOpSpec:
    """Random classical processing, optionally with a random instrument.

    Args:
        n_inputs: Inputs of the processed assemblage.
        n_outputs: Outputs of the processed assemblage.
        rng: Random generator.
        n_inputs_out: Inputs of the result, defaults to n_inputs.
        n_outputs_out: Outputs of the result, defaults to n_outputs.
        n_omega: Number of values of the shared randomness.
        instrument_dim: If given, an instrument with one Kraus operator per ω
            is drawn from a Haar random isometry on this dimension.
        input_dependent: Whether the output processing may depend on x
            (only allowed for steering operations).
    """
    n_inputs_out = n_inputs if n_inputs_out is None else n_inputs_out
    n_outputs_out = n_outputs if n_outputs_out is None else n_outputs_out
    p_omega = rng.dirichlet(np.ones(n_omega))
    p_input = _conditional((n_omega, n_inputs_out, n_inputs), rng)
    if input_dependent:
        p_output = _conditional(
            (n_omega, n_inputs_out, n_inputs, n_outputs, n_outputs_out),
            rng,
        )
    else:
        shared = _conditional((n_omega, n_inputs_out, 1, n_outputs, n_outputs_out), rng)
        p_output = np.repeat(shared, n_inputs, axis=2)
    instrument = None
    if instrument_dim is not None:
        unitary = linalg.haar_unitary(instrument_dim * n_omega, rng)
        isometry = unitary[:, :instrument_dim]
        instrument = tuple(
            (isometry[omega * instrument_dim : (omega + 1) * instrument_dim],)
            for omega in range(n_omega)
        )
    return FreeOpSpec(p_omega, p_input, p_output, instrument)
