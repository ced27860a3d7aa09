"""Serialized assemblage and noise model documents.

Documents are JSON objects. Complex matrices are nested lists of
``[re, im]`` pairs indexed ``[row][col]``; assemblages nest them as
``[x][a][row][col]``. Python's JSON float formatting is the shortest
round-tripping repr, so ``parse(emit(x))`` reproduces every entry bit for bit.

Every document carries a ``schema_version``. Documents older than
`MIN_SCHEMA_VERSION` or with a newer major version than
`CURRENT_SCHEMA_VERSION` are rejected, as are unknown fields.
"""
from __future__ import annotations

import json
import math
import typing as t
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from packaging import version

from steerdistil.core import errors
from steerdistil.core.assemblage import (
    MeasurementAssemblage,
    StateAssemblage,
    require_valid,
)
from steerdistil.core.helper import DEFAULT_TOLERANCES, AssemblageKind, Tolerances
from steerdistil.robustness.noise import LinearConstraint, NoiseModel

# 1.0 is the first layout with explicit [re, im] pairs.
MIN_SCHEMA_VERSION = version.Version("1.0")
CURRENT_SCHEMA_VERSION = version.Version("1.0")

_ASSEMBLAGE_FIELDS = {
    "schema_version",
    "kind",
    "dim",
    "n_inputs",
    "n_outputs",
    "elements",
    "carrier",
}
_NOISE_MODEL_FIELDS = {"schema_version", "kind", "target", "constraints", "fixed"}
_CONSTRAINT_FIELDS = {"coefficients", "value"}

Assemblage = t.Union[StateAssemblage, MeasurementAssemblage]


def encode_matrix(matrix: np.ndarray) -> t.List[t.Any]:
    """Nested lists of [re, im] pairs for an array of any rank ≥ 1."""
    array = np.asarray(matrix, dtype=np.complex128)
    if array.ndim == 0:
        value = complex(array)
        return [value.real, value.imag]
    return [encode_matrix(item) for item in array]


def _is_number(value: object) -> bool:
    return (
        isinstance(value, (int, float))
        and not isinstance(value, bool)
        and math.isfinite(value)
    )


def decode_matrix(
    value: object,
    shape: t.Tuple[int, ...],
    position: str,
) -> np.ndarray:
    """Inverse of `encode_matrix` with shape checking.

    Raises:
        DocumentError: With the path of the first offending entry.
    """
    if not shape:
        if (
            not isinstance(value, list)
            or len(value) != 2  # noqa: PLR2004
            or not all(_is_number(part) for part in value)
        ):
            msg = "Expected an [re, im] pair of finite numbers."
            raise errors.DocumentError(msg, position)
        return np.complex128(complex(float(value[0]), float(value[1])))
    if not isinstance(value, list) or len(value) != shape[0]:
        length = len(value) if isinstance(value, list) else type(value).__name__
        msg = f"Expected a list of length {shape[0]}, got {length}."
        raise errors.DocumentError(msg, position)
    return np.array(
        [
            decode_matrix(item, shape[1:], f"{position}[{index}]")
            for index, item in enumerate(value)
        ],
        dtype=np.complex128,
    )


def _check_fields(
    data: object,
    allowed: t.Set[str],
    required: t.Set[str],
    position: str,
) -> dict:
    if not isinstance(data, dict):
        msg = f"Expected an object, got {type(data).__name__}."
        raise errors.DocumentError(msg, position)
    unknown = sorted(set(data) - allowed)
    if unknown:
        msg = f"Unknown field(s) {', '.join(unknown)}."
        raise errors.DocumentError(msg, position)
    missing = sorted(required - set(data))
    if missing:
        msg = f"Missing field(s) {', '.join(missing)}."
        raise errors.DocumentError(msg, position)
    return data


def check_schema_version(raw: object) -> version.Version:
    """Parse and gate the schema version of a document.

    Raises:
        DocumentError: If the version is malformed, too old or from a newer
            major release.
    """
    try:
        schema_version = version.Version(str(raw))
    except version.InvalidVersion as err:
        msg = f"Invalid schema version {raw!r}."
        raise errors.DocumentError(msg, "schema_version") from err
    if schema_version < MIN_SCHEMA_VERSION:
        msg = (
            f"Schema version {schema_version} is no longer supported "
            f"(minimum {MIN_SCHEMA_VERSION})."
        )
        raise errors.DocumentError(msg, "schema_version")
    if schema_version.major > CURRENT_SCHEMA_VERSION.major:
        msg = (
            f"Schema version {schema_version} is newer than this version of "
            f"steerdistil supports ({CURRENT_SCHEMA_VERSION})."
        )
        raise errors.DocumentError(msg, "schema_version")
    return schema_version


def _positive_int(data: dict, name: str) -> int:
    value = data[name]
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        msg = f"Expected a positive integer, got {value!r}."
        raise errors.DocumentError(msg, name)
    return value


def _leading_shape(value: object, depth: int, position: str) -> t.Tuple[int, ...]:
    """Lengths of the first `depth` list levels, following first items."""
    shape = []
    for _ in range(depth):
        if not isinstance(value, list) or not value:
            msg = "Coefficients need the layout [x][a][row][col][re, im]."
            raise errors.DocumentError(msg, position)
        shape.append(len(value))
        value = value[0]
    return tuple(shape)


def _parse_json(text: str) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as err:
        raise errors.DocumentError(err.msg, f"{err.lineno}:{err.colno}") from err


@dataclass(frozen=True, eq=False)
class AssemblageDocument:
    """Serialized form of a state or measurement assemblage.

    Args:
        kind: State or measurement assemblage.
        elements: Array of shape (n_inputs, n_outputs, dim, dim).
        carrier: Carrier projector of a measurement assemblage, if it is not
            the identity.
        schema_version: Version of the document layout.
    """

    kind: AssemblageKind
    elements: np.ndarray
    carrier: t.Optional[np.ndarray] = None
    schema_version: str = str(CURRENT_SCHEMA_VERSION)

    @staticmethod
    def from_assemblage(assemblage: Assemblage) -> AssemblageDocument:
        """Document of an in-memory assemblage."""
        if isinstance(assemblage, StateAssemblage):
            return AssemblageDocument(
                AssemblageKind.STATE,
                np.array(assemblage.elements),
            )
        carrier: t.Optional[np.ndarray] = np.array(assemblage.carrier)
        if np.array_equal(carrier, np.eye(assemblage.dim)):
            carrier = None
        return AssemblageDocument(
            AssemblageKind.MEASUREMENT,
            np.array(assemblage.elements),
            carrier,
        )

    def to_assemblage(
        self,
        *,
        tolerances: Tolerances = DEFAULT_TOLERANCES,
    ) -> Assemblage:
        """Validated assemblage of the document.

        Raises:
            ValidationError: If the assemblage violates its invariants.
        """
        assemblage: Assemblage
        if self.kind is AssemblageKind.STATE:
            assemblage = StateAssemblage(self.elements)
        else:
            assemblage = MeasurementAssemblage(self.elements, carrier=self.carrier)
        require_valid(assemblage, tolerances=tolerances)
        return assemblage

    def to_dict(self) -> t.Dict[str, t.Any]:
        """JSON compatible representation."""
        n_inputs, n_outputs, dim = self.elements.shape[:3]
        data: t.Dict[str, t.Any] = {
            "schema_version": self.schema_version,
            "kind": self.kind.value,
            "dim": int(dim),
            "n_inputs": int(n_inputs),
            "n_outputs": int(n_outputs),
            "elements": encode_matrix(self.elements),
        }
        if self.carrier is not None:
            data["carrier"] = encode_matrix(self.carrier)
        return data

    def to_json(self) -> str:
        """Serialized document."""
        return json.dumps(self.to_dict(), indent=1)

    @staticmethod
    def from_dict(data: object) -> AssemblageDocument:
        """Parse a decoded JSON object.

        Raises:
            DocumentError: On unknown or missing fields, a bad schema version
                or entries that do not match the declared shape.
        """
        required = _ASSEMBLAGE_FIELDS - {"carrier"}
        data = _check_fields(data, _ASSEMBLAGE_FIELDS, required, "")
        schema_version = check_schema_version(data["schema_version"])
        try:
            kind = AssemblageKind.from_string(data["kind"])
        except ValueError as err:
            raise errors.DocumentError(str(err), "kind") from err
        dim = _positive_int(data, "dim")
        shape = (
            _positive_int(data, "n_inputs"),
            _positive_int(data, "n_outputs"),
            dim,
            dim,
        )
        elements = decode_matrix(data["elements"], shape, "elements")
        carrier = None
        if "carrier" in data:
            if kind is not AssemblageKind.MEASUREMENT:
                msg = "Only measurement assemblages have a carrier."
                raise errors.DocumentError(msg, "carrier")
            carrier = decode_matrix(data["carrier"], (dim, dim), "carrier")
        return AssemblageDocument(kind, elements, carrier, str(schema_version))

    @staticmethod
    def from_json(text: str) -> AssemblageDocument:
        """Parse a serialized document.

        Raises:
            DocumentError: If the text is not valid JSON (positioned by line
                and column) or not a valid document.
        """
        return AssemblageDocument.from_dict(_parse_json(text))


def load_assemblage(
    path: t.Union[str, Path],
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> Assemblage:
    """Read and validate an assemblage document."""
    text = Path(path).read_text(encoding="utf-8")
    return AssemblageDocument.from_json(text).to_assemblage(tolerances=tolerances)


def dump_assemblage(assemblage: Assemblage, path: t.Union[str, Path]) -> None:
    """Write an assemblage document."""
    Path(path).write_text(
        AssemblageDocument.from_assemblage(assemblage).to_json() + "\n",
        encoding="utf-8",
    )


def noise_model_from_dict(data: object) -> NoiseModel:
    """Parse a noise model document.

    A noise model document names its ``target`` kind and either a list of
    linear ``constraints`` (objects with ``coefficients`` in assemblage
    layout and a real ``value``) or a single ``fixed`` noise assemblage.
    Its ``kind`` is always ``"noise-model"``.

    Raises:
        DocumentError: If the document is malformed.
    """
    required = {"schema_version", "kind", "target"}
    data = _check_fields(data, _NOISE_MODEL_FIELDS, required, "")
    check_schema_version(data["schema_version"])
    if data["kind"] != "noise-model":
        msg = f"Expected kind 'noise-model', got {data['kind']!r}."
        raise errors.DocumentError(msg, "kind")
    try:
        target = AssemblageKind.from_string(data["target"])
    except ValueError as err:
        raise errors.DocumentError(str(err), "target") from err
    if ("fixed" in data) == ("constraints" in data):
        msg = "Exactly one of 'constraints' and 'fixed' is required."
        raise errors.DocumentError(msg)
    if "fixed" in data:
        fixed = AssemblageDocument.from_dict(data["fixed"])
        if fixed.kind is not target:
            msg = (
                f"Fixed noise is a {fixed.kind.value} assemblage, "
                f"target is {target.value}."
            )
            raise errors.DocumentError(msg, "fixed.kind")
        return NoiseModel.fixed(fixed.to_assemblage())
    raw = data["constraints"]
    if not isinstance(raw, list):
        msg = "Expected a list of constraints."
        raise errors.DocumentError(msg, "constraints")
    constraints = []
    for index, item in enumerate(raw):
        position = f"constraints[{index}]"
        entry = _check_fields(item, _CONSTRAINT_FIELDS, _CONSTRAINT_FIELDS, position)
        shape = _leading_shape(entry["coefficients"], 4, f"{position}.coefficients")
        value = entry["value"]
        if not _is_number(value):
            msg = f"Expected a finite number, got {value!r}."
            raise errors.DocumentError(msg, f"{position}.value")
        constraints.append(
            LinearConstraint(
                decode_matrix(entry["coefficients"], shape, f"{position}.coefficients"),
                float(value),
            ),
        )
    return NoiseModel.custom(target, constraints)


def load_noise_model(path: t.Union[str, Path]) -> NoiseModel:
    """Read a noise model document."""
    return noise_model_from_dict(_parse_json(Path(path).read_text(encoding="utf-8")))
