"""Fixed worked examples.

The qubit-qutrit distillation example: the untrusted party A holds a qubit,
the trusted party B a qutrit, and they share

    ρ_AB^(v) = v |φ+⟩⟨φ+| + (1 − v) 𝕀_A/2 ⊗ |2⟩⟨2|,

with |φ+⟩ maximally entangled in the qubit spanned by |0⟩, |1⟩ of B. A
measures the Pauli Z and X observables. The filter K = |0⟩⟨0| + |1⟩⟨1|
removes the |2⟩ component with success probability v and leaves E^Pauli/2
on the qubit of B.
"""
from __future__ import annotations

import math

import numpy as np

from steerdistil.core import errors
from steerdistil.core.assemblage import (
    BipartiteState,
    MeasurementAssemblage,
    StateAssemblage,
    steer_from_state,
)
from steerdistil.core.filters import FilterKraus

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

# Generalised robustness of the sharp Z/X pair, (√2 − 1)².
PAULI_ROBUSTNESS = 3 - 2 * math.sqrt(2)

# White noise robustness of the same pair.
PAULI_WHITE_NOISE_ROBUSTNESS = math.sqrt(2) - 1


def sharp_measurements(*observables: np.ndarray) -> MeasurementAssemblage:
    """Two outcome projective measurements E_{a|x} = (𝕀 + (−1)^a O_x)/2."""
    identity = np.eye(observables[0].shape[0])
    return MeasurementAssemblage(
        [
            [(identity + sign * observable) / 2 for sign in (1, -1)]
            for observable in observables
        ],
    )


def pauli_measurements() -> MeasurementAssemblage:
    """E^Pauli: Z for input 0, X for input 1."""
    return sharp_measurements(PAULI_Z, PAULI_X)


def embed(matrix: np.ndarray, dim: int) -> np.ndarray:
    """Embed operators into the upper left corner of dim × dim matrices."""
    size = matrix.shape[-1]
    result = np.zeros((*matrix.shape[:-2], dim, dim), dtype=np.complex128)
    result[..., :size, :size] = matrix
    return result


def example_state(v: float) -> BipartiteState:
    """The shared qubit-qutrit state ρ_AB^(v).

    Raises:
        ValidationError: If v is not in [0, 1].
    """
    if not 0 <= v <= 1:
        msg = f"Visibility must lie in [0, 1], got {v}."
        raise errors.ValidationError(msg)
    phi = np.zeros(6, dtype=np.complex128)
    # A ⊗ B ordering: |a⟩|b⟩ ↦ 3a + b.
    phi[0] = phi[4] = 1 / math.sqrt(2)
    two = np.zeros((3, 3), dtype=np.complex128)
    two[2, 2] = 1
    matrix = v * np.outer(phi, phi.conj()) + (1 - v) * np.kron(np.eye(2) / 2, two)
    return BipartiteState(matrix, dim_a=2, dim_b=3)


def example_assemblage(v: float) -> StateAssemblage:
    """σ^(v): the assemblage steered by the Pauli measurements from ρ_AB^(v)."""
    return steer_from_state(example_state(v), pauli_measurements())


def example_filter() -> FilterKraus:
    """K = |0⟩⟨0| + |1⟩⟨1| on the qutrit."""
    return FilterKraus.projector(np.eye(3)[:, :2])


def final_assemblage() -> StateAssemblage:
    """E^Pauli/2 embedded in the qubit of the qutrit."""
    return StateAssemblage(embed(pauli_measurements().elements / 2, 3))
