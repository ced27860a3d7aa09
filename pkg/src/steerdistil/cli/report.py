"""Machine readable command reports.

A report records everything needed to reproduce a command: the command
name, a SHA-256 digest of its input files, the seed, the tolerances and
search settings in effect, the results and a summary of every SDP that
produced them.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
import typing as t
from enum import Enum
from pathlib import Path

import numpy as np

from steerdistil import __version__
from steerdistil.cli.document import CURRENT_SCHEMA_VERSION, encode_matrix
from steerdistil.core.helper import Tolerances
from steerdistil.sdp import SDPSolution


def digest_inputs(paths: t.Sequence[t.Union[str, Path]]) -> str:
    """SHA-256 over the bytes of the input files in the given order."""
    digest = hashlib.sha256()
    for path in paths:
        content = Path(path).read_bytes()
        digest.update(len(content).to_bytes(8, "big"))
        digest.update(content)
    return digest.hexdigest()


def to_jsonable(value: object) -> object:
    """Convert results to JSON.

    Complex arrays become ``{"shape": ..., "entries": [[re, im], ...]}``,
    infinities the strings ``"inf"`` and ``"-inf"``, enums their value and
    dataclasses dictionaries of their fields. NaN becomes ``"nan"``.
    """
    if isinstance(value, np.ndarray):
        return {"shape": list(value.shape), "entries": encode_matrix(value)}
    if isinstance(value, (np.floating, float)):
        number = float(value)
        if math.isnan(number):
            return "nan"
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return number
    if isinstance(value, (np.integer, np.bool_)):
        return value.item()
    if isinstance(value, Enum):
        return value.value
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return {
            field.name: to_jsonable(getattr(value, field.name))
            for field in dataclasses.fields(value)
        }
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    return value


def certificate_summary(name: str, solution: SDPSolution) -> t.Dict[str, object]:
    """Status, objectives and residuals of a solved program."""
    return {
        "program": name,
        "status": solution.status.value,
        "primal_objective": solution.primal_objective,
        "dual_objective": solution.dual_objective,
        "gap": solution.gap,
        "primal_residual": solution.primal_residual,
        "dual_residual": solution.dual_residual,
        "iterations": solution.iterations,
    }


@dataclasses.dataclass
class ReportDocument:
    """Report of one command run.

    Args:
        command: Name of the CLI verb.
        inputs_digest: SHA-256 of the input files, empty without inputs.
        seed: Root seed of all random streams.
        tolerances: Tolerances in effect.
        settings: Further settings such as restarts or suite sizes.
        results: Named results.
        certificates: Summaries of the SDPs solved for the results.
    """

    command: str
    inputs_digest: str
    seed: int
    tolerances: Tolerances
    settings: t.Dict[str, object] = dataclasses.field(default_factory=dict)
    results: t.Dict[str, object] = dataclasses.field(default_factory=dict)
    certificates: t.List[t.Dict[str, object]] = dataclasses.field(default_factory=list)

    def add_certificate(self, name: str, solution: SDPSolution) -> None:
        """Record the summary of a solved program."""
        self.certificates.append(certificate_summary(name, solution))

    def to_dict(self) -> t.Dict[str, object]:
        """JSON compatible representation."""
        return {
            "schema_version": str(CURRENT_SCHEMA_VERSION),
            "steerdistil_version": __version__,
            "command": self.command,
            "inputs_digest": self.inputs_digest,
            "seed": self.seed,
            "tolerances": dataclasses.asdict(self.tolerances),
            "settings": to_jsonable(self.settings),
            "results": to_jsonable(self.results),
            "certificates": to_jsonable(self.certificates),
        }

    def write(self, directory: t.Union[str, Path]) -> Path:
        """Write the report as ``<command>-report.json`` into a directory.

        Returns:
            Path of the written report.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"{self.command}-report.json"
        path.write_text(
            json.dumps(self.to_dict(), indent=1, allow_nan=False) + "\n",
            encoding="utf-8",
        )
        return path
