"""Tests the certification suites."""
import math

import pytest
from steerdistil.cli import certify
from steerdistil.core import errors

SMALL = certify.CertifyConfig(n_instances=3, seed=1, restarts=4)


@pytest.mark.parametrize("suite", ["rank", "faithful", "consistency"])
def test_small_suites_pass(suite):
    result = certify.run_suite(suite, SMALL)
    assert result.passed
    assert [outcome.index for outcome in result.outcomes] == [0, 1, 2]
    assert result.worst_margin <= 0
    assert result.undecided == 0


def test_instances_are_reproducible():
    first = certify.run_instance("consistency", 2, SMALL)
    second = certify.run_instance("consistency", 2, SMALL)
    assert first.details == second.details


def test_unknown_suite():
    with pytest.raises(ValueError, match="Unknown suite"):
        certify.run_suite("obscure", SMALL)


def test_solver_failure_fails_the_instance(monkeypatch):
    def failing(index, config):  # noqa: ARG001
        msg = "no progress"
        raise errors.SolverFailureError(msg)

    monkeypatch.setitem(certify.SUITES, "rank", failing)
    result = certify.run_suite("rank", certify.CertifyConfig(n_instances=2))
    assert not result.passed
    assert math.isinf(result.worst_margin)
    assert result.outcomes[0].details == {"error": "no progress"}


def test_undecided_roundtrips_fail_the_suite(monkeypatch):
    def undecided(index, config):  # noqa: ARG001
        return certify.InstanceOutcome(index, True, 0.0, undecided=index == 0)

    monkeypatch.setitem(certify.SUITES, "roundtrip", undecided)
    result = certify.run_suite("roundtrip", certify.CertifyConfig(n_instances=4))
    assert result.undecided == 1
    assert not result.passed

    result = certify.run_suite("roundtrip", certify.CertifyConfig(n_instances=40))
    assert result.passed


@pytest.mark.slow
@pytest.mark.parametrize(
    "suite",
    ["filter-bound", "roundtrip", "invariance", "monotone"],
)
def test_suites_pass(suite):
    assert certify.run_suite(suite, SMALL).passed
