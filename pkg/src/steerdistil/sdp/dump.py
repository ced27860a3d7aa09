"""Sparse triplet text dump of an `SDPProblem`.

The format is line based. Lines starting with ``#`` are comments. Indices are
zero based, values are written with ``repr`` precision.

    # steerdistil sdp dump 1
    block <b> <name> <dim> <psd|free>
    objective <b> <row> <col> <re> <im>
    equality <i> <rhs> <label>
    entry <i> <b> <row> <col> <re> <im>

Only the upper triangle (row ≤ col) of every Hermitian coefficient is listed
and entries with both parts zero are skipped. An external tool that works
with real symmetric data can embed complex blocks as
[[Re X, −Im X], [Im X, Re X]].
"""
from __future__ import annotations

import logging
import typing as t
from pathlib import Path

import numpy as np

from steerdistil.core.helper import Operator
from steerdistil.sdp.problem import SDPProblem

logger = logging.getLogger(__name__)

HEADER = "# steerdistil sdp dump 1"


def _triplets(matrix: Operator) -> t.Iterator[str]:
    rows, cols = np.triu_indices(matrix.shape[0])
    for row, col in zip(rows, cols):
        value = complex(matrix[row, col])
        if value != 0:
            yield f"{row} {col} {value.real!r} {value.imag!r}"


def format_problem(problem: SDPProblem) -> str:
    """Render a problem in the sparse triplet format."""
    index = {block.name: position for position, block in enumerate(problem.blocks)}
    lines = [HEADER]
    lines.extend(
        f"block {position} {block.name} {block.dim} {'psd' if block.psd else 'free'}"
        for position, block in enumerate(problem.blocks)
    )
    for name, coefficient in problem.objective.items():
        lines.extend(
            f"objective {index[name]} {triplet}" for triplet in _triplets(coefficient)
        )
    for position, equality in enumerate(problem.equalities):
        lines.append(f"equality {position} {equality.rhs!r} {equality.label}".rstrip())
        for name, coefficient in equality.coefficients.items():
            lines.extend(
                f"entry {position} {index[name]} {triplet}"
                for triplet in _triplets(coefficient)
            )
    return "\n".join(lines) + "\n"


def write_problem(problem: SDPProblem, path: t.Union[str, Path]) -> None:
    """Write a problem to a file in the sparse triplet format."""
    Path(path).write_text(format_problem(problem), encoding="utf-8")
    logger.debug("Wrote SDP dump to %s.", path)
