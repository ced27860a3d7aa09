import numpy as np
import pytest
from steerdistil.core import errors
from steerdistil.robustness.strategies import (
    MAX_STRATEGIES,
    enumerate_deterministic_strategies,
)


@pytest.mark.parametrize(
    ("n_inputs", "n_outputs", "count"),
    [(1, 1, 1), (2, 2, 4), (3, 2, 8), (2, 3, 9), (4, 3, 81)],
)
def test_strategy_count(n_inputs, n_outputs, count):
    strategies = enumerate_deterministic_strategies(n_inputs, n_outputs)
    assert len(strategies) == count
    assert len({tuple(row) for row in strategies.responses}) == count


def test_lexicographic_order():
    strategies = enumerate_deterministic_strategies(2, 2)
    np.testing.assert_array_equal(
        strategies.responses,
        [[0, 0], [0, 1], [1, 0], [1, 1]],
    )


def test_table_is_one_hot():
    strategies = enumerate_deterministic_strategies(3, 3)
    table = strategies.table
    assert table.shape == (27, 3, 3)
    np.testing.assert_array_equal(table.sum(axis=2), 1)
    assert table[5, 2, strategies.responses[5, 2]] == 1


def test_too_many_strategies():
    with pytest.raises(errors.TooManyStrategiesError, match=str(MAX_STRATEGIES)):
        enumerate_deterministic_strategies(21, 2)


@pytest.mark.parametrize(("n_inputs", "n_outputs"), [(0, 2), (2, 0)])
def test_empty_scenario(n_inputs, n_outputs):
    with pytest.raises(ValueError, match="at least one"):
        enumerate_deterministic_strategies(n_inputs, n_outputs)
