"""Deterministic response strategies.

A deterministic strategy λ is a function x ↦ a. Every LHS model and every
joint measurement decomposes into a mixture of them, so the strategies index
the variables of all membership and robustness programs.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from steerdistil.core.errors import TooManyStrategiesError

MAX_STRATEGIES = 10**6


@dataclass(frozen=True, eq=False)
class DeterministicStrategySet:
    """All functions from n_inputs inputs to n_outputs outputs.

    Args:
        n_inputs: Number of inputs x.
        n_outputs: Number of outputs a.
        responses: Array of shape (n_strategies, n_inputs); row λ holds the
            output λ(x) for every input.
    """

    n_inputs: int
    n_outputs: int
    responses: np.ndarray

    def __len__(self) -> int:
        return int(self.responses.shape[0])

    @property
    def table(self) -> np.ndarray:
        """Indicator D(a|x,λ) of shape (n_strategies, n_inputs, n_outputs)."""
        return (self.responses[:, :, None] == np.arange(self.n_outputs)).astype(int)


def enumerate_deterministic_strategies(
    n_inputs: int,
    n_outputs: int,
) -> DeterministicStrategySet:
    """Enumerate all deterministic strategies in lexicographic order.

    Strategy 0 answers 0 to every input; the last input varies fastest.

    Args:
        n_inputs: Number of inputs.
        n_outputs: Number of outputs.

    Returns:
        The complete strategy set.

    Raises:
        TooManyStrategiesError: If n_outputs^n_inputs exceeds `MAX_STRATEGIES`.
        ValueError: If a count is smaller than one.
    """
    if n_inputs < 1 or n_outputs < 1:
        msg = f"Need at least one input and output, got {n_inputs} and {n_outputs}."
        raise ValueError(msg)
    count = n_outputs**n_inputs
    if count > MAX_STRATEGIES:
        msg = (
            f"{n_outputs}^{n_inputs} = {count} deterministic strategies exceed "
            f"the limit of {MAX_STRATEGIES}."
        )
        raise TooManyStrategiesError(msg)
    responses = np.array(
        list(itertools.product(range(n_outputs), repeat=n_inputs)),
        dtype=int,
    ).reshape(count, n_inputs)
    return DeterministicStrategySet(n_inputs, n_outputs, responses)
