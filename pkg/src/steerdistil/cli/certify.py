"""Certification suites for the quantified invariants.

Every suite draws its instances from `steerdistil.sampling` with the stream
``(seed, suite, index)``, so an instance is reproduced independently of the
other instances and of the number of workers. Each instance reports whether
it passed and a margin: the amount by which the checked quantity exceeds
its bound (negative or zero when the bound holds).
"""
from __future__ import annotations

import logging
import typing as t
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from steerdistil import sampling
from steerdistil.core import errors, linalg
from steerdistil.core.assemblage import (
    StateAssemblage,
    compute_seo,
    seo_inducible_assemblage,
    steer_from_state,
)
from steerdistil.core.filters import (
    FilterKraus,
    apply_filter,
    max_success_probability,
    synthesize_filter,
)
from steerdistil.core.helper import DEFAULT_TOLERANCES, Tolerances
from steerdistil.core.ordering import (
    SearchConfig,
    VerdictStatus,
    search_order_witness,
    witness_from_filter,
)
from steerdistil.robustness.free_ops import apply_incompatibility_free_op
from steerdistil.robustness.induced import (
    InducedSearchConfig,
    steering_induced_incompatibility,
)
from steerdistil.robustness.measures import (
    consistent_steering_robustness,
    incompatibility_robustness,
    lhs_membership,
    steering_robustness,
)

logger = logging.getLogger(__name__)

CONSISTENCY_TOLERANCE = 1e-5
BOUND_TOLERANCE = 1e-6
ROUNDTRIP_TOLERANCE = 1e-6
PROBABILITY_SLACK = 1e-7
FAITHFUL_TOLERANCE = 1e-7
# Share of roundtrip instances on which the witness search must succeed.
MIN_SEARCH_SUCCESS_RATE = 0.95
MIN_FILTER_PROBABILITY = 0.01
FILTERS_PER_INSTANCE = 5


@dataclass(frozen=True)
class CertifyConfig:
    """Settings of a certification run.

    Args:
        n_instances: Number of random instances.
        seed: Root seed.
        restarts: Restarts of the witness search (roundtrip and rank).
        workers: Worker processes; 1 runs everything in process.
        tolerances: Numerical tolerances.
    """

    n_instances: int = 20
    seed: int = 0
    restarts: int = 20
    workers: int = 1
    tolerances: Tolerances = DEFAULT_TOLERANCES


@dataclass(frozen=True)
class InstanceOutcome:
    """Result of one instance of a suite.

    Args:
        index: Instance index.
        passed: Whether the checked bound holds.
        margin: Excess over the bound (≤ 0 when it holds).
        details: Named values of the instance.
        undecided: The instance did not decide the property (a witness
            search ended Unknown). Undecided instances count as passed.
    """

    index: int
    passed: bool
    margin: float
    details: t.Dict[str, object] = field(default_factory=dict)
    undecided: bool = False


@dataclass(frozen=True)
class SuiteResult:
    """Result of a whole suite."""

    suite: str
    outcomes: t.Tuple[InstanceOutcome, ...]
    passed: bool
    worst_margin: float
    undecided: int


def _dims(rng: np.random.Generator) -> int:
    return int(rng.choice([2, 3]))


def _random_filter_with_probability(
    sigma: StateAssemblage,
    rng: np.random.Generator,
    tolerances: Tolerances,
    *,
    full_rank: bool = False,
) -> t.Tuple[FilterKraus, StateAssemblage, float]:
    """Draw filters until one succeeds with probability above the floor."""
    while True:
        kraus = sampling.random_filter(sigma.dim, rng)
        if not full_rank and rng.uniform() < 0.5:  # noqa: PLR2004
            kraus = sampling.random_filter(sigma.dim, rng, rank=sigma.dim - 1)
        outcome = apply_filter(sigma, kraus, tolerances=tolerances)
        if outcome.p_succ > MIN_FILTER_PROBABILITY:
            return kraus, outcome.output, outcome.p_succ


def _consistency(index: int, config: CertifyConfig) -> InstanceOutcome:
    rng = sampling.derive_rng(config.seed, "consistency", index)
    measurements = sampling.random_measurement_assemblage(2, 2, 2, rng)
    incompatibility = incompatibility_robustness(
        measurements,
        tolerances=config.tolerances,
    ).value
    consistent = consistent_steering_robustness(
        seo_inducible_assemblage(measurements),
        tolerances=config.tolerances,
    ).value
    gap = abs(incompatibility - consistent)
    return InstanceOutcome(
        index,
        gap <= CONSISTENCY_TOLERANCE,
        gap - CONSISTENCY_TOLERANCE,
        {"IR": incompatibility, "SR_consistent": consistent},
    )


def _filter_bound(index: int, config: CertifyConfig) -> InstanceOutcome:
    rng = sampling.derive_rng(config.seed, "filter-bound", index)
    dim = _dims(rng)
    sharp = bool(rng.uniform() < 0.5)  # noqa: PLR2004
    sigma = sampling.random_state_assemblage(dim, 2, 2, rng, sharp=sharp)
    bound = incompatibility_robustness(
        compute_seo(sigma, tolerances=config.tolerances),
        tolerances=config.tolerances,
    ).value
    filtered = []
    for _ in range(FILTERS_PER_INSTANCE):
        _, output, _ = _random_filter_with_probability(sigma, rng, config.tolerances)
        filtered.append(steering_robustness(output, tolerances=config.tolerances).value)
    margin = max(filtered) - bound - BOUND_TOLERANCE
    return InstanceOutcome(
        index,
        margin <= 0,
        margin,
        {"IR_seo": bound, "SR_filtered": filtered},
    )


def _monotone(index: int, config: CertifyConfig) -> InstanceOutcome:
    rng = sampling.derive_rng(config.seed, "monotone", index)
    measurements = sampling.random_measurement_assemblage(2, 2, 2, rng)
    op = sampling.random_free_op(2, 2, rng)
    processed = apply_incompatibility_free_op(measurements, op)
    tolerances = config.tolerances
    before = incompatibility_robustness(measurements, tolerances=tolerances).value
    after = incompatibility_robustness(processed, tolerances=tolerances).value
    # The pair found for the processed assemblage also feeds the original
    # one, and classical processing commutes with √η U · U† √η.
    search = InducedSearchConfig(n_restarts=2, max_iters=5, seed=index)
    induced = steering_induced_incompatibility(
        processed,
        "SR",
        search,
        tolerances=config.tolerances,
    )
    root = linalg.matrix_sqrt(induced.eta) @ induced.unitary
    transferred = StateAssemblage(root @ measurements.elements @ linalg.dagger(root))
    reachable = steering_robustness(transferred, tolerances=config.tolerances).value
    margin = max(after - before, induced.lower_bound - reachable) - BOUND_TOLERANCE
    return InstanceOutcome(
        index,
        margin <= 0,
        margin,
        {
            "IR_before": before,
            "IR_after": after,
            "I_SR_after_lower_bound": induced.lower_bound,
            "SR_same_pair_before": reachable,
        },
    )


def _roundtrip(index: int, config: CertifyConfig) -> InstanceOutcome:
    rng = sampling.derive_rng(config.seed, "roundtrip", index)
    dim = _dims(rng)
    sigma = sampling.random_state_assemblage(dim, 2, 2, rng)
    applied, tau, p_actual = _random_filter_with_probability(
        sigma,
        rng,
        config.tolerances,
    )
    verdict = search_order_witness(
        sigma,
        tau,
        SearchConfig(n_restarts=config.restarts, seed=index),
        tolerances=config.tolerances,
    )
    if verdict.status is VerdictStatus.UNKNOWN:
        logger.warning("Roundtrip instance %d is undecided.", index)
        return InstanceOutcome(
            index,
            passed=True,
            margin=0.0,
            details={"status": verdict.status, "best_residual": verdict.best_residual},
            undecided=True,
        )
    if verdict.status is VerdictStatus.REFUTED_BY_RANK or verdict.best_witness is None:
        return InstanceOutcome(index, False, np.inf, {"status": verdict.status})
    best = verdict.best_witness
    kraus = synthesize_filter(sigma, tau, best.unitary, tolerances=config.tolerances)
    outcome = apply_filter(sigma, kraus, tolerances=config.tolerances)
    residual = float(np.max(np.abs(outcome.output.elements - tau.elements)))
    # Witnesses are not unique once the filter lowers the rank, so the
    # witness read off the applied filter joins the searched one.
    applied_witness = witness_from_filter(sigma, applied, tolerances=config.tolerances)
    p_max, _ = max_success_probability(
        sigma,
        tau,
        [best.unitary, applied_witness],
        tolerances=config.tolerances,
    )
    margin = max(
        residual - ROUNDTRIP_TOLERANCE,
        p_actual - p_max - PROBABILITY_SLACK,
    )
    return InstanceOutcome(
        index,
        margin <= 0,
        margin,
        {
            "status": verdict.status,
            "residual": residual,
            "p_actual": p_actual,
            "p_searched": best.success_probability,
            "p_max": p_max,
        },
    )


def _invariance(index: int, config: CertifyConfig) -> InstanceOutcome:
    rng = sampling.derive_rng(config.seed, "invariance", index)
    dim = _dims(rng)
    sigma = sampling.random_state_assemblage(dim, 2, 2, rng)
    _, output, _ = _random_filter_with_probability(
        sigma,
        rng,
        config.tolerances,
        full_rank=True,
    )
    before = consistent_steering_robustness(sigma, tolerances=config.tolerances).value
    after = consistent_steering_robustness(output, tolerances=config.tolerances).value
    gap = abs(before - after)
    return InstanceOutcome(
        index,
        gap <= CONSISTENCY_TOLERANCE,
        gap - CONSISTENCY_TOLERANCE,
        {"SR_consistent_before": before, "SR_consistent_after": after},
    )


def _rank(index: int, config: CertifyConfig) -> InstanceOutcome:
    rng = sampling.derive_rng(config.seed, "rank", index)
    dim = _dims(rng)
    low = int(rng.integers(1, dim))
    sigma = sampling.random_state_assemblage(dim, 2, 2, rng, rank=low)
    high = int(rng.integers(low + 1, dim + 1))
    tau = sampling.random_state_assemblage(dim, 2, 2, rng, rank=high)
    verdict = search_order_witness(
        sigma,
        tau,
        SearchConfig(n_restarts=1, seed=index),
        tolerances=config.tolerances,
    )
    refuted = verdict.status is VerdictStatus.REFUTED_BY_RANK
    return InstanceOutcome(
        index,
        refuted,
        0.0 if refuted else 1.0,
        {"status": verdict.status},
    )


def _faithful(index: int, config: CertifyConfig) -> InstanceOutcome:
    rng = sampling.derive_rng(config.seed, "faithful", index)
    dim = _dims(rng)
    product = sampling.random_bipartite_state(2, dim, rng, product=True)
    measurements = sampling.random_measurement_assemblage(2, 2, 2, rng, sharp=True)
    unsteerable = steer_from_state(product, measurements)
    value = steering_robustness(unsteerable, tolerances=config.tolerances).value
    member = lhs_membership(
        sampling.random_lhs_assemblage(dim, 2, 2, rng),
        tolerances=config.tolerances,
    )
    margin = max(value, member.robustness.value) - FAITHFUL_TOLERANCE
    return InstanceOutcome(
        index,
        margin <= 0 and member.member,
        margin,
        {"SR_product": value, "lhs_member": member.member},
    )


SUITES: t.Dict[str, t.Callable[[int, CertifyConfig], InstanceOutcome]] = {
    "consistency": _consistency,
    "filter-bound": _filter_bound,
    "monotone": _monotone,
    "roundtrip": _roundtrip,
    "invariance": _invariance,
    "rank": _rank,
    "faithful": _faithful,
}


def run_instance(suite: str, index: int, config: CertifyConfig) -> InstanceOutcome:
    """Run one instance of a suite.

    Solver failures of an instance are reported as a failed instance with
    infinite margin instead of aborting the suite.
    """
    try:
        return SUITES[suite](index, config)
    except errors.SolverError as err:
        logger.error("Instance %d of %s failed to solve: %s", index, suite, err)
        return InstanceOutcome(index, False, np.inf, {"error": str(err)})


def run_suite(suite: str, config: CertifyConfig) -> SuiteResult:
    """Run all instances of a suite.

    Args:
        suite: Suite name, one of `SUITES`.
        config: Run settings.

    Returns:
        Instance outcomes in index order with the overall verdict.

    Raises:
        ValueError: If the suite is unknown.
    """
    if suite not in SUITES:
        msg = f"Unknown suite {suite!r}, expected one of {sorted(SUITES)}."
        raise ValueError(msg)
    indices = range(config.n_instances)
    if config.workers > 1:
        # Worker processes get the configuration without shared state.
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            outcomes = tuple(
                pool.map(
                    run_instance,
                    [suite] * len(indices),
                    indices,
                    [replace(config, workers=1)] * len(indices),
                ),
            )
    else:
        outcomes = tuple(run_instance(suite, index, config) for index in indices)

    undecided = sum(outcome.undecided for outcome in outcomes)
    passed = all(outcome.passed for outcome in outcomes)
    if suite == "roundtrip" and outcomes:
        success_rate = 1 - undecided / len(outcomes)
        if success_rate < MIN_SEARCH_SUCCESS_RATE:
            logger.warning(
                "Witness search succeeded on %.0f%% of the instances only.",
                100 * success_rate,
            )
            passed = False
    worst = max((outcome.margin for outcome in outcomes), default=-np.inf)
    logger.info("Suite %s: passed=%s, worst margin %.3e.", suite, passed, worst)
    return SuiteResult(suite, outcomes, passed, float(worst), undecided)
