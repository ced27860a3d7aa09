"""Command line interface of steerdistil.

Every command writes a JSON report into ``--out`` and prints the report path
with a one line summary. The exit code is 0 on success, 2 for invalid
input, 3 for solver failures, 4 for failed certification and 1 otherwise.
"""
from __future__ import annotations

import argparse
import logging
import sys
import typing as t
from dataclasses import replace
from pathlib import Path

import numpy as np

from steerdistil import __version__, catalog, sampling
from steerdistil.cli import certify
from steerdistil.cli.document import (
    Assemblage,
    dump_assemblage,
    load_assemblage,
    load_noise_model,
)
from steerdistil.cli.exit_codes import EXIT_SUCCESS, exit_code_for
from steerdistil.cli.report import ReportDocument, digest_inputs
from steerdistil.core import errors, linalg
from steerdistil.core.assemblage import (
    MeasurementAssemblage,
    StateAssemblage,
    compute_seo,
    reduced_state,
    steer_from_state,
)
from steerdistil.core.filters import apply_filter, synthesize_filter
from steerdistil.core.helper import DEFAULT_TOLERANCES, Tolerances
from steerdistil.core.ordering import (
    OrderWitness,
    SearchConfig,
    VerdictStatus,
    search_order_witness,
    verify_order_witness,
    witness_from_filter,
)
from steerdistil.robustness.measures import (
    RobustnessResult,
    consistent_steering_robustness,
    incompatibility_robustness,
    robustness_with_noise_model,
    steering_robustness,
)
from steerdistil.robustness.noise import is_seo_included

logger = logging.getLogger(__name__)

_LOG_LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)
DEMO_TOLERANCE = 1e-12


def _tolerances(args: argparse.Namespace) -> Tolerances:
    if args.tol is None:
        return DEFAULT_TOLERANCES
    return replace(DEFAULT_TOLERANCES, order=args.tol)


def _report(args: argparse.Namespace, inputs: t.Sequence[str] = ()) -> ReportDocument:
    return ReportDocument(
        command=args.command,
        inputs_digest=digest_inputs(inputs) if inputs else "",
        seed=args.seed,
        tolerances=_tolerances(args),
        settings={"restarts": args.restarts},
    )


def _require_state(assemblage: Assemblage, path: str) -> StateAssemblage:
    if not isinstance(assemblage, StateAssemblage):
        msg = f"{path} holds a measurement assemblage, a state assemblage is required."
        raise errors.ValidationError(msg)
    return assemblage


def _robustness_entry(
    report: ReportDocument,
    name: str,
    result: RobustnessResult,
) -> float:
    report.results[name] = result.value
    report.results[f"{name}_optimal_noise"] = result.optimal_noise
    report.add_certificate(name, result.certificate)
    return result.value


def _cmd_seo(args: argparse.Namespace) -> t.Tuple[ReportDocument, str]:
    tolerances = _tolerances(args)
    assemblage = load_assemblage(args.input, tolerances=tolerances)
    sigma = _require_state(assemblage, args.input)
    seo = compute_seo(sigma, tolerances=tolerances)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seo_path = out / "seo.json"
    dump_assemblage(seo, seo_path)
    report = _report(args, [args.input])
    report.results.update(
        {"seo_document": str(seo_path), "carrier_rank": seo.carrier_rank},
    )
    return report, f"SEO with carrier rank {seo.carrier_rank} written to {seo_path}"


def _cmd_check_order(args: argparse.Namespace) -> t.Tuple[ReportDocument, str]:
    tolerances = _tolerances(args)
    sigma = _require_state(
        load_assemblage(args.sigma, tolerances=tolerances),
        args.sigma,
    )
    tau = _require_state(load_assemblage(args.tau, tolerances=tolerances), args.tau)
    config = SearchConfig(n_restarts=args.restarts, seed=args.seed)
    verdict = search_order_witness(sigma, tau, config, tolerances=tolerances)
    report = _report(args, [args.sigma, args.tau])
    report.results.update(
        {
            "status": verdict.status,
            "restarts_run": verdict.restarts,
            "best_residual": verdict.best_residual,
        },
    )
    if verdict.status is VerdictStatus.REFUTED_BY_RANK:
        return report, "refuted-by-rank: no filter raises the rank of the reduced state"
    if verdict.best_witness is None:
        return report, f"unknown: no witness after {verdict.restarts} restarts"
    best = verdict.best_witness
    kraus = synthesize_filter(sigma, tau, best.unitary, tolerances=tolerances)
    report.results.update(
        {
            "witness": best.unitary,
            "residual": best.residual,
            "lambda_opt": best.lambda_opt,
            "p_max": best.success_probability,
            "filter": kraus.operator,
        },
    )
    return report, f"holds: p_max = {best.success_probability:.10g}"


def _cmd_robustness(args: argparse.Namespace) -> t.Tuple[ReportDocument, str]:
    tolerances = _tolerances(args)
    assemblage = load_assemblage(args.input, tolerances=tolerances)
    inputs = [args.input]
    report = _report(args, inputs)
    measure = args.measure
    if measure == "custom":
        if args.model is None:
            msg = "--measure custom needs a noise model (--model)."
            raise errors.ValidationError(msg)
        inputs.append(args.model)
        model = load_noise_model(args.model)
        value = _robustness_entry(
            report,
            "custom",
            robustness_with_noise_model(assemblage, model, tolerances=tolerances),
        )
        if args.seo_model is not None:
            sigma = _require_state(assemblage, args.input)
            inputs.append(args.seo_model)
            seo_model = load_noise_model(args.seo_model)
            included = is_seo_included(seo_model, model)
            if not included and not args.acknowledge_seo_inclusion:
                msg = (
                    "The SEO inclusion of the noise model pair is not verified; pass "
                    "--acknowledge-seo-inclusion to compare the two values anyway."
                )
                raise errors.ValidationError(msg)
            bound = _robustness_entry(
                report,
                "custom_seo",
                robustness_with_noise_model(
                    compute_seo(sigma, tolerances=tolerances),
                    seo_model,
                    tolerances=tolerances,
                ),
            )
            report.results["distillable_gap"] = bound - value
        report.inputs_digest = digest_inputs(inputs)
        return report, f"custom robustness = {value:.10g}"

    if measure == "ir":
        measurements = (
            assemblage
            if isinstance(assemblage, MeasurementAssemblage)
            else compute_seo(assemblage, tolerances=tolerances)
        )
        value = _robustness_entry(
            report,
            "IR",
            incompatibility_robustness(measurements, tolerances=tolerances),
        )
        return report, f"IR = {value:.10g}"

    sigma = _require_state(assemblage, args.input)
    if measure == "sr":
        value = _robustness_entry(
            report,
            "SR",
            steering_robustness(sigma, tolerances=tolerances),
        )
    else:
        value = _robustness_entry(
            report,
            "SR_consistent",
            consistent_steering_robustness(sigma, tolerances=tolerances),
        )
    # IR of the SEO bounds both measures for the built-in noise pairs.
    bound = _robustness_entry(
        report,
        "IR_seo",
        incompatibility_robustness(
            compute_seo(sigma, tolerances=tolerances),
            tolerances=tolerances,
        ),
    )
    report.results["distillable_gap"] = bound - value
    name = "SR" if measure == "sr" else "SR^(c)"
    return report, f"{name} = {value:.10g} (IR of SEO {bound:.10g})"


def _cmd_demo(args: argparse.Namespace) -> t.Tuple[ReportDocument, str]:
    tolerances = _tolerances(args)
    v = args.v
    if not 0 < v <= 1:
        msg = f"The visibility must lie in (0, 1], got {v}."
        raise errors.ValidationError(msg)
    sigma = catalog.example_assemblage(v)
    kraus = catalog.example_filter()
    outcome = apply_filter(sigma, kraus, tolerances=tolerances)
    expected = catalog.final_assemblage()
    final_error = float(np.max(np.abs(outcome.output.elements - expected.elements)))
    unitary = witness_from_filter(sigma, kraus, tolerances=tolerances)
    witness = verify_order_witness(sigma, expected, unitary, tolerances=tolerances)
    seo = compute_seo(sigma, tolerances=tolerances)
    verified = isinstance(witness, OrderWitness)

    report = _report(args)
    report.settings["v"] = v
    report.results.update(
        {
            "state": catalog.example_state(v).matrix,
            "sigma": sigma.elements,
            "reduced_state": reduced_state(sigma, tolerances=tolerances),
            "filter": kraus.operator,
            "sigma_final": outcome.output.elements,
            "final_max_error": final_error,
            "p_succ": outcome.p_succ,
            "witness_verified": verified,
            "lambda_opt": witness.lambda_opt if verified else np.inf,
            "seo": seo.elements,
            "seo_carrier_rank": seo.carrier_rank,
        },
    )
    before = _robustness_entry(
        report,
        "SR_before",
        steering_robustness(sigma, tolerances=tolerances),
    )
    after = _robustness_entry(
        report,
        "SR_after",
        steering_robustness(outcome.output, tolerances=tolerances),
    )
    _robustness_entry(
        report,
        "SR_consistent_before",
        consistent_steering_robustness(sigma, tolerances=tolerances),
    )
    _robustness_entry(
        report,
        "SR_consistent_after",
        consistent_steering_robustness(outcome.output, tolerances=tolerances),
    )
    _robustness_entry(
        report,
        "IR_seo",
        incompatibility_robustness(seo, tolerances=tolerances),
    )
    return report, (
        f"p_succ = {outcome.p_succ:.12g}, SR {before:.8g} -> {after:.8g}, "
        f"final error {final_error:.2e}"
    )


def _cmd_certify(args: argparse.Namespace) -> t.Tuple[ReportDocument, str]:
    config = certify.CertifyConfig(
        n_instances=args.instances,
        seed=args.seed,
        restarts=args.restarts,
        workers=args.workers,
        tolerances=_tolerances(args),
    )
    result = certify.run_suite(args.suite, config)
    report = _report(args)
    report.settings.update(
        {"suite": args.suite, "instances": args.instances, "workers": args.workers},
    )
    report.results.update(
        {
            "passed": result.passed,
            "worst_margin": result.worst_margin,
            "undecided": result.undecided,
            "instances": list(result.outcomes),
        },
    )
    verdict = "pass" if result.passed else "FAIL"
    return report, (
        f"{args.suite}: {verdict}, worst margin {result.worst_margin:.3e}, "
        f"{result.undecided} undecided"
    )


def _cmd_generate(args: argparse.Namespace) -> t.Tuple[ReportDocument, str]:
    rng = sampling.derive_rng(args.seed, "generate")
    assemblage: Assemblage
    if args.kind == "measurement":
        assemblage = sampling.random_measurement_assemblage(
            args.dim,
            args.inputs,
            args.outputs,
            rng,
            sharp=args.sharp,
        )
    elif args.source == "lhs":
        assemblage = sampling.random_lhs_assemblage(
            args.dim,
            args.inputs,
            args.outputs,
            rng,
        )
    elif args.source in ("product", "entangled"):
        state = sampling.random_bipartite_state(
            args.dim_a,
            args.dim,
            rng,
            product=args.source == "product",
        )
        measurements = sampling.random_measurement_assemblage(
            args.dim_a,
            args.inputs,
            args.outputs,
            rng,
            sharp=args.sharp,
        )
        assemblage = steer_from_state(state, measurements)
    else:
        assemblage = sampling.random_state_assemblage(
            args.dim,
            args.inputs,
            args.outputs,
            rng,
            rank=args.rank,
            sharp=args.sharp,
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / args.name
    dump_assemblage(assemblage, path)
    report = _report(args)
    report.settings.update(
        {
            "kind": args.kind,
            "source": args.source,
            "dim": args.dim,
            "dim_a": args.dim_a,
            "inputs": args.inputs,
            "outputs": args.outputs,
            "sharp": args.sharp,
            "rank": args.rank,
        },
    )
    report.results["document"] = str(path)
    report.inputs_digest = digest_inputs([path])
    if isinstance(assemblage, StateAssemblage):
        report.results["reduced_state_rank"] = linalg.rank(reduced_state(assemblage))
    return report, f"{args.kind} assemblage written to {path}"


_Command = t.Callable[[argparse.Namespace], t.Tuple[ReportDocument, str]]

_COMMANDS: t.Dict[str, _Command] = {
    "seo": _cmd_seo,
    "check-order": _cmd_check_order,
    "robustness": _cmd_robustness,
    "demo": _cmd_demo,
    "certify": _cmd_certify,
    "generate": _cmd_generate,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per verb."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--seed",
        type=int,
        default=0,
        help="root seed of all random streams",
    )
    common.add_argument(
        "--tol",
        type=float,
        default=None,
        help="tolerance of the witness residual, 1e-7 if omitted",
    )
    common.add_argument(
        "--restarts",
        type=int,
        default=20,
        help="witness search restarts",
    )
    common.add_argument(
        "--out",
        default=".",
        help="directory for reports and documents",
    )
    common.add_argument(
        "-v",
        "--verbose",
        action="count",
        default=0,
        help="-v for progress, -vv for solver traces",
    )

    parser = argparse.ArgumentParser(
        prog="steerdistil",
        description="Stochastic steering distillation with single-Kraus local filters.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)

    seo = commands.add_parser(
        "seo",
        parents=[common],
        help="steering-equivalent observable",
    )
    seo.add_argument("input", help="state assemblage document")

    order = commands.add_parser(
        "check-order",
        parents=[common],
        help="decide whether sigma can be filtered into tau",
    )
    order.add_argument("sigma", help="source state assemblage document")
    order.add_argument("tau", help="target state assemblage document")

    robustness = commands.add_parser(
        "robustness",
        parents=[common],
        help="steering or incompatibility robustness",
    )
    robustness.add_argument("input", help="assemblage document")
    robustness.add_argument(
        "--measure",
        choices=("sr", "src", "ir", "custom"),
        default="sr",
        help="sr: steering, src: consistent steering, ir: incompatibility (of the "
        "SEO for state input), custom: noise model from --model",
    )
    robustness.add_argument("--model", help="noise model document for --measure custom")
    robustness.add_argument(
        "--seo-model",
        help="measurement noise model to bound the custom value through the SEO",
    )
    robustness.add_argument(
        "--acknowledge-seo-inclusion",
        action="store_true",
        help="compare custom noise models whose SEO inclusion is not verified",
    )

    demo = commands.add_parser(
        "demo",
        parents=[common],
        help="qubit-qutrit worked example",
    )
    demo.add_argument("--v", type=float, default=0.5, help="visibility in (0, 1]")

    suite = commands.add_parser(
        "certify",
        parents=[common],
        help="check invariants on random instances",
    )
    suite.add_argument("--suite", choices=sorted(certify.SUITES), required=True)
    suite.add_argument("--instances", type=int, default=20)
    suite.add_argument("--workers", type=int, default=1, help="worker processes")

    generate = commands.add_parser(
        "generate",
        parents=[common],
        help="random assemblage document",
    )
    generate.add_argument("--kind", choices=("state", "measurement"), default="state")
    generate.add_argument(
        "--source",
        choices=("seo", "product", "entangled", "lhs"),
        default="seo",
        help="seo: random density and POVMs, product/entangled: measure A of a "
        "random bipartite state, lhs: local hidden state model",
    )
    generate.add_argument(
        "--dim",
        type=int,
        default=2,
        help="dimension of the trusted party",
    )
    generate.add_argument("--dim-a", type=int, default=2, help="dimension of party A")
    generate.add_argument("--inputs", type=int, default=2)
    generate.add_argument("--outputs", type=int, default=2)
    generate.add_argument(
        "--rank",
        type=int,
        default=None,
        help="rank of the reduced state",
    )
    generate.add_argument(
        "--sharp",
        action="store_true",
        help="projective measurements",
    )
    generate.add_argument("--name", default="generated.json", help="document file name")
    return parser


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    """Run the command line interface.

    Args:
        argv: Arguments without the program name, defaults to `sys.argv`.

    Returns:
        The exit code.
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=_LOG_LEVELS[min(args.verbose, len(_LOG_LEVELS) - 1)],
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        report, summary = _COMMANDS[args.command](args)
        path = report.write(args.out)
        sys.stdout.write(f"{path}\n{summary}\n")
        if args.command == "certify" and not report.results["passed"]:
            msg = f"Certification suite {args.suite} failed."
            raise errors.CertificationError(msg)
        if (
            args.command == "demo"
            and report.results["final_max_error"] > DEMO_TOLERANCE
        ):
            msg = (
                "The filtered example deviates from the final assemblage by "
                f"{report.results['final_max_error']:.3e}."
            )
            raise errors.CertificationError(msg)
    except errors.SteerDistilError as err:
        logger.error("%s", err)
        return exit_code_for(err)
    except OSError as err:
        logger.error("%s", err)
        return exit_code_for(err)
    return EXIT_SUCCESS


if __name__ == "__main__":
    sys.exit(main())
