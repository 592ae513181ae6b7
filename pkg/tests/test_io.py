import json

import numpy as np
import pytest

from causal_capacity.channels import depolarizing, random_cptp, xy_channel
from causal_capacity.errors import InvariantViolationError, ParseError, SchemaError
from causal_capacity.io import (
    channel_from_dict,
    channel_to_dict,
    complex_from_json,
    data_path,
    load_channel,
    load_process,
    matrix_from_json,
    process_from_dict,
    process_to_dict,
    write_json,
)
from causal_capacity.processes import (
    apply_process,
    build_cnot_sdpp,
    build_salek_sdpp,
    build_shor_sdpp,
    build_switch,
)

SHIPPED_CHANNELS = ["depolarizing_qubit", "xy_qubit", "identity_qubit", "bit_flip_half",
                    "phase_flip_half", "pauli_depolarizing_qubit"]
SHIPPED_PROCESSES = {"switch": build_switch, "cnot_sdpp": build_cnot_sdpp, "salek_sdpp": build_salek_sdpp,
                     "shor_sdpp": build_shor_sdpp}


@pytest.mark.parametrize("name", SHIPPED_CHANNELS)
def test_shipped_channels_load(name):
    c = load_channel(data_path(f"{name}.json"))
    assert c.kraus_residual() <= 1e-12


def test_shipped_channel_contents():
    assert np.allclose(load_channel(data_path("depolarizing_qubit.json")).choi.matrix, depolarizing(2).choi.matrix)
    assert np.allclose(load_channel(data_path("xy_qubit.json")).choi.matrix, xy_channel().choi.matrix)


@pytest.mark.parametrize("name", sorted(SHIPPED_PROCESSES))
def test_shipped_processes_load(name):
    w = load_process(data_path(f"{name}.json"))
    assert np.allclose(w.amplitudes, SHIPPED_PROCESSES[name]().amplitudes, atol=1e-15)


def test_channel_round_trip(tmp_path, rng):
    c = random_cptp(2, 3, 2, rng)
    for rep in ("kraus", "choi"):
        path = tmp_path / f"{rep}.json"
        write_json(channel_to_dict(c, rep), path)
        back = load_channel(path)
        assert np.max(np.abs(back.choi.matrix - c.choi.matrix)) <= 1e-12


def test_induced_channel_keeps_layout():
    c = apply_process(build_switch(), depolarizing(2), depolarizing(2))
    doc = channel_to_dict(c)
    assert doc["out_layout"] == [["C", 2], ["F", 2]]
    back = channel_from_dict(json.loads(json.dumps(doc)))
    assert back.out_layout == c.out_layout


def test_process_round_trip():
    for build in (build_cnot_sdpp, build_salek_sdpp):
        w = build()
        back = process_from_dict(json.loads(json.dumps(process_to_dict(w))))
        assert np.array_equal(back.amplitudes, w.amplitudes)


def test_malformed_scalar_names_path():
    doc = channel_to_dict(depolarizing(2))
    doc["kraus"][0][1][0] = [1.0]
    with pytest.raises(SchemaError) as exc:
        channel_from_dict(doc)
    assert exc.value.path == "$.kraus[0][1][0]"
    assert "$.kraus[0][1][0]" in str(exc.value)


def test_schema_errors():
    with pytest.raises(SchemaError):
        complex_from_json("1+2j", "$")
    with pytest.raises(SchemaError):
        complex_from_json([True, 0], "$")
    with pytest.raises(SchemaError):
        matrix_from_json([[[1, 0]], [[1, 0], [0, 0]]], "$.m")
    with pytest.raises(SchemaError) as exc:
        channel_from_dict({"in_dim": 2, "out_dim": 2})
    assert exc.value.path == "$"
    with pytest.raises(SchemaError) as exc:
        channel_from_dict({"in_dim": 0, "out_dim": 2, "kraus": []})
    assert exc.value.path == "$.in_dim"
    with pytest.raises(SchemaError) as exc:
        process_from_dict({"kind": "mystery"})
    assert exc.value.path == "$.kind"
    with pytest.raises(SchemaError) as exc:
        process_from_dict({"kind": "sdpp", "terms": [{"order": "CA"}]})
    assert exc.value.path == "$.terms[0].order"


def test_wrong_kraus_shape_is_schema_error():
    doc = channel_to_dict(depolarizing(2))
    doc["in_dim"] = 3
    with pytest.raises(SchemaError):
        channel_from_dict(doc)


def test_non_cptp_is_invariant_violation():
    doc = channel_to_dict(depolarizing(2))
    doc["kraus"] = doc["kraus"][:1]
    with pytest.raises(InvariantViolationError):
        channel_from_dict(doc)


def test_non_unitary_term_is_invariant_violation():
    doc = process_to_dict(build_cnot_sdpp())
    doc["terms"][0]["T"] = [[[2, 0], [0, 0]], [[0, 0], [1, 0]]]
    with pytest.raises(InvariantViolationError):
        process_from_dict(doc)


def test_parse_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_channel(bad)
    with pytest.raises(ParseError):
        load_channel(tmp_path / "missing.json")
