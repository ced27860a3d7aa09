"""Tests the command reports."""
import json
from enum import Enum

import numpy as np
import pytest
from steerdistil import __version__
from steerdistil.cli.report import ReportDocument, digest_inputs, to_jsonable
from steerdistil.core.helper import DEFAULT_TOLERANCES, AssemblageKind, Tolerances
from steerdistil.sdp import SDPProblem, solve


class _Colour(Enum):
    RED = "red"


@pytest.mark.parametrize(
    ("value", "expected"),
    [
        (float("nan"), "nan"),
        (float("inf"), "inf"),
        (-np.inf, "-inf"),
        (np.float64(0.25), 0.25),
        (np.int64(3), 3),
        (np.bool_(True), True),
        (_Colour.RED, "red"),
        (AssemblageKind.STATE, "state"),
        ((1, [2.0, float("inf")]), [1, [2.0, "inf"]]),
        ({1: "a"}, {"1": "a"}),
        ("text", "text"),
    ],
)
def test_to_jsonable(value, expected):
    assert to_jsonable(value) == expected


def test_arrays_keep_their_shape():
    converted = to_jsonable(np.array([[1.0, 1j]]))
    assert converted == {"shape": [1, 2], "entries": [[[1.0, 0.0], [0.0, 1.0]]]}


def test_dataclasses_become_dictionaries():
    converted = to_jsonable(Tolerances(order=1e-3))
    assert converted["order"] == 1e-3
    assert converted["trace"] == DEFAULT_TOLERANCES.trace


def test_digest_depends_on_order_and_content(tmp_path):
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    first.write_text("ab", encoding="utf-8")
    second.write_text("c", encoding="utf-8")
    forward = digest_inputs([first, second])
    assert forward == digest_inputs([first, second])
    assert forward != digest_inputs([second, first])
    assert len(forward) == 64
    # Length prefixes keep ("ab", "c") apart from ("a", "bc").
    first.write_text("a", encoding="utf-8")
    second.write_text("bc", encoding="utf-8")
    assert forward != digest_inputs([first, second])


def test_report_is_written(tmp_path):
    problem = SDPProblem()
    problem.add_block("X", 2)
    problem.set_objective("X", np.eye(2))
    problem.add_equality({"X": np.diag([1.0, 0.0])}, 1.0)
    report = ReportDocument(
        "demo",
        "",
        7,
        DEFAULT_TOLERANCES,
        settings={"restarts": 4},
        results={"value": np.float64(np.inf)},
    )
    report.add_certificate("corner", solve(problem))
    path = report.write(tmp_path / "out")
    assert path.name == "demo-report.json"
    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["schema_version"] == "1.0"
    assert data["steerdistil_version"] == __version__
    assert data["seed"] == 7
    assert data["results"] == {"value": "inf"}
    assert data["settings"] == {"restarts": 4}
    assert data["certificates"][0]["program"] == "corner"
    assert data["certificates"][0]["status"] == "optimal"
