"""Tests the assemblage and noise model documents."""
import json
import math

import numpy as np
import pytest
from steerdistil import catalog, sampling
from steerdistil.cli.document import (
    AssemblageDocument,
    check_schema_version,
    decode_matrix,
    dump_assemblage,
    encode_matrix,
    load_assemblage,
    load_noise_model,
    noise_model_from_dict,
)
from steerdistil.core import errors
from steerdistil.core.assemblage import MeasurementAssemblage, StateAssemblage
from steerdistil.core.helper import AssemblageKind
from steerdistil.robustness import NoiseKind


def _state_document():
    return AssemblageDocument.from_assemblage(catalog.example_assemblage(0.3)).to_dict()


def test_round_trip_is_bit_exact(tmp_path):
    rng = sampling.derive_rng(0, "document")
    sigma = sampling.random_state_assemblage(3, 2, 3, rng)
    path = tmp_path / "sigma.json"
    dump_assemblage(sigma, path)
    loaded = load_assemblage(path)
    assert isinstance(loaded, StateAssemblage)
    np.testing.assert_array_equal(loaded.elements, sigma.elements)


def test_measurement_carrier_round_trip():
    measurements = MeasurementAssemblage(
        catalog.embed(catalog.pauli_measurements().elements, 3),
        carrier=np.diag([1.0, 1.0, 0.0]),
    )
    document = AssemblageDocument.from_assemblage(measurements)
    parsed = AssemblageDocument.from_json(document.to_json()).to_assemblage()
    assert isinstance(parsed, MeasurementAssemblage)
    np.testing.assert_array_equal(parsed.carrier, measurements.carrier)


def test_identity_carrier_is_omitted():
    data = AssemblageDocument.from_assemblage(catalog.pauli_measurements()).to_dict()
    assert "carrier" not in data
    assert data["kind"] == "measurement"
    assert (data["n_inputs"], data["n_outputs"], data["dim"]) == (2, 2, 2)


def test_encode_matrix_layout():
    assert encode_matrix(np.array([[1, 2j]])) == [[[1.0, 0.0], [0.0, 2.0]]]
    np.testing.assert_array_equal(
        decode_matrix([[[1.0, 0.0], [0.0, 2.0]]], (1, 2), "m"),
        np.array([[1, 2j]]),
    )


@pytest.mark.parametrize(
    ("change", "position", "match"),
    [
        ({"extra": 1}, "", "Unknown field"),
        ({"kind": "channel"}, "kind", "channel"),
        ({"dim": 0}, "dim", "positive integer"),
        ({"dim": True}, "dim", "positive integer"),
        ({"schema_version": "2.0"}, "schema_version", "newer"),
        ({"schema_version": "0.9"}, "schema_version", "no longer supported"),
        ({"schema_version": "one"}, "schema_version", "Invalid schema version"),
        ({"carrier": [[[1.0, 0.0]] * 3] * 3}, "carrier", "Only measurement"),
    ],
)
def test_malformed_documents(change, position, match):
    data = {**_state_document(), **change}
    with pytest.raises(errors.DocumentError, match=match) as info:
        AssemblageDocument.from_dict(data)
    assert info.value.position == position


def test_missing_field():
    data = _state_document()
    del data["elements"]
    with pytest.raises(errors.DocumentError, match="Missing field"):
        AssemblageDocument.from_dict(data)


def test_wrong_length_is_positioned():
    data = _state_document()
    data["elements"][1] = data["elements"][1][:1]
    with pytest.raises(errors.DocumentError, match="length 2") as info:
        AssemblageDocument.from_dict(data)
    assert info.value.position == "elements[1]"


def test_bad_entry_is_positioned():
    data = _state_document()
    data["elements"][0][1][2][0] = [1.0, "0"]
    with pytest.raises(errors.DocumentError) as info:
        AssemblageDocument.from_dict(data)
    assert info.value.position == "elements[0][1][2][0]"


@pytest.mark.parametrize("entry", [math.nan, math.inf, -math.inf])
def test_non_finite_entries_are_rejected(entry):
    data = _state_document()
    data["elements"][0][0][0][0] = [entry, 0.0]
    with pytest.raises(errors.DocumentError, match="finite") as info:
        AssemblageDocument.from_json(json.dumps(data))
    assert info.value.position == "elements[0][0][0][0]"


def test_json_syntax_error_is_positioned():
    with pytest.raises(errors.DocumentError) as info:
        AssemblageDocument.from_json('{\n "kind": }')
    assert info.value.position == "2:10"


def test_invalid_assemblage_is_rejected(tmp_path):
    data = _state_document()
    data["elements"][0][0][0][0] = [-0.5, 0.0]
    path = tmp_path / "negative.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    with pytest.raises(errors.ValidationError):
        load_assemblage(path)


def test_schema_version_accepts_minor_updates():
    assert str(check_schema_version("1.3")) == "1.3"


def _white_noise_constraint():
    coefficients = np.zeros((2, 2, 2, 2))
    coefficients[0, 0] = np.eye(2)
    return {"coefficients": encode_matrix(coefficients), "value": 0.5}


def test_noise_model_with_constraints(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(
        json.dumps(
            {
                "schema_version": "1.0",
                "kind": "noise-model",
                "target": "state",
                "constraints": [_white_noise_constraint()],
            },
        ),
        encoding="utf-8",
    )
    model = load_noise_model(path)
    assert model.kind is NoiseKind.CUSTOM
    assert model.target is AssemblageKind.STATE
    assert model.constraints[0].value == 0.5
    np.testing.assert_array_equal(model.constraints[0].coefficients[0, 0], np.eye(2))


def test_fixed_noise_model():
    white = MeasurementAssemblage(np.broadcast_to(np.eye(2) / 2, (2, 2, 2, 2)))
    model = noise_model_from_dict(
        {
            "schema_version": "1.0",
            "kind": "noise-model",
            "target": "measurement",
            "fixed": AssemblageDocument.from_assemblage(white).to_dict(),
        },
    )
    np.testing.assert_array_equal(model.fixed_noise, white.elements)


@pytest.mark.parametrize(
    ("change", "position", "match"),
    [
        ({"kind": "state"}, "kind", "noise-model"),
        ({"target": "channel"}, "target", "channel"),
        ({"constraints": {}}, "constraints", "list of constraints"),
        ({"constraints": [{"value": 1.0}]}, "constraints[0]", "Missing field"),
        (
            {"constraints": [{**_white_noise_constraint(), "value": "half"}]},
            "constraints[0].value",
            "Expected a finite number",
        ),
        (
            {"constraints": [{**_white_noise_constraint(), "value": math.inf}]},
            "constraints[0].value",
            "finite number",
        ),
        (
            {"constraints": [{"coefficients": [], "value": 1.0}]},
            "constraints[0].coefficients",
            "layout",
        ),
        (
            {
                "fixed": AssemblageDocument.from_assemblage(
                    catalog.pauli_measurements(),
                ).to_dict(),
            },
            "",
            "Exactly one",
        ),
    ],
)
def test_malformed_noise_models(change, position, match):
    data = {
        "schema_version": "1.0",
        "kind": "noise-model",
        "target": "state",
        "constraints": [_white_noise_constraint()],
        **change,
    }
    with pytest.raises(errors.DocumentError, match=match) as info:
        noise_model_from_dict(data)
    assert info.value.position == position


def test_fixed_noise_kind_must_match_target():
    data = {
        "schema_version": "1.0",
        "kind": "noise-model",
        "target": "state",
        "fixed": AssemblageDocument.from_assemblage(
            catalog.pauli_measurements(),
        ).to_dict(),
    }
    with pytest.raises(errors.DocumentError, match="target is state") as info:
        noise_model_from_dict(data)
    assert info.value.position == "fixed.kind"
