"""Numerical tolerances, assemblage kinds and operator aliases.

Every core module imports these, so the module depends on nothing else in
the package.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from typing_extensions import TypeAlias

# Dense complex matrix. Hermitian where the name of the argument says so.
Operator: TypeAlias = np.ndarray

# Array of shape (n_inputs, n_outputs, dim, dim), indexed [x][a].
OperatorFamily: TypeAlias = np.ndarray


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by the core operations.

    Args:
        hermiticity: Maximal absolute deviation of H from H†.
        negativity: Eigenvalue floor (relative to the largest eigenvalue)
            below which an operator counts as negative.
        support: Relative eigenvalue cutoff deciding the rank of an operator.
        support_inclusion: Maximal Frobenius norm of (I − Π_ρ)Π_η for
            supp(η) ⊆ supp(ρ) to hold.
        trace: Maximal deviation of a density operator's trace from one.
        no_signalling: Maximal entrywise x-dependence of Σ_a σ_{a|x}
            accepted by the validators.
        reduced_state: Maximal x-dependence accepted when forming ρ_σ.
        success_probability: Smallest filter success probability treated
            as non-vanishing.
        order: Maximal residual of the SEO ordering decomposition.
        unitarity: Maximal entry of U†U − I for U to count as unitary.
    """

    hermiticity: float = 1e-10
    negativity: float = 1e-9
    support: float = 1e-10
    support_inclusion: float = 1e-8
    trace: float = 1e-9
    no_signalling: float = 1e-9
    reduced_state: float = 1e-7
    success_probability: float = 1e-12
    order: float = 1e-7
    unitarity: float = 1e-9


DEFAULT_TOLERANCES = Tolerances()


class AssemblageKind(Enum):
    """Kind of an operator family.

    A state assemblage carries unnormalised conditional states; a measurement
    assemblage carries one POVM per input.
    """

    STATE = "state"
    MEASUREMENT = "measurement"

    @classmethod
    def from_string(cls, name: str) -> AssemblageKind:
        """Construct an AssemblageKind from its serialized name.

        Args:
            name: Either "state" or "measurement".

        Returns:
            The matching kind.

        Raises:
            ValueError: If the name is unknown.
        """
        try:
            return cls(name)
        except ValueError:
            msg = f"Invalid assemblage kind: {name!r}."
            raise ValueError(msg) from None


def as_operator(matrix: object) -> Operator:
    """Convert array-like input to a complex square matrix.

    Args:
        matrix: Anything numpy can turn into a two dimensional array.

    Returns:
        A complex128 copy of the input.

    Raises:
        ValueError: If the input is not a square matrix.
    """
    array = np.array(matrix, dtype=np.complex128)
    if array.ndim != 2 or array.shape[0] != array.shape[1]:  # noqa: PLR2004
        msg = f"Expected a square matrix, got shape {array.shape}."
        raise ValueError(msg)
    return array


def frozen(array: np.ndarray) -> np.ndarray:
    """Return a read-only copy of an array."""
    copy = np.array(array, dtype=np.complex128)
    copy.setflags(write=False)
    return copy
