"""Wire protocol: canonical JSON encoding, map RLE, the marginal codec,
client message validation, and golden files locking the exact bytes."""

import json
from pathlib import Path as FilePath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from navsim.config import SimConfig
from navsim.control import DwaConfig
from navsim.protocol import (
    ProtocolError,
    decode_cells_rle,
    decode_marginal,
    dumps,
    encode_cells_rle,
    error_message,
    map_payload,
    marginal_b64,
    parse_client_message,
    snapshot_message,
    welcome_message,
)
from navsim.sim import Simulator
from navsim.world import Pose, load_map

MAPS = FilePath(__file__).parent / "maps"
GOLDEN = FilePath(__file__).parent / "golden"


# ----------------------------------------------------------- canonical dumps


def test_dumps_sorts_keys_and_strips_spaces():
    assert dumps({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


def test_dumps_rounds_floats_to_nine_decimals():
    assert dumps({"x": 0.12345678949}) == '{"x":0.123456789}'
    assert dumps({"x": 1.0}) == '{"x":1.0}'


def test_dumps_normalizes_signed_zero():
    assert dumps({"x": -0.0}) == '{"x":0.0}'
    assert dumps({"x": -1e-12}) == '{"x":0.0}'


def test_dumps_leaves_bools_and_ints_alone():
    assert dumps({"a": True, "b": 7}) == '{"a":true,"b":7}'


def test_dumps_recurses_into_tuples():
    assert dumps({"p": ((1.0, -0.0),)}) == '{"p":[[1.0,0.0]]}'


# -------------------------------------------------------------------- map RLE


def test_rle_round_trip_tiny():
    cells = np.array([[0, 0, 1], [2, 2, 2]], dtype=np.uint8)
    runs = encode_cells_rle(cells)
    assert runs == [2, 0, 1, 1, 3, 2]
    assert np.array_equal(decode_cells_rle(runs, 3, 2), cells)


def test_rle_adjacent_runs_differ():
    rng = np.random.default_rng(3)
    cells = rng.integers(0, 3, size=(9, 7)).astype(np.uint8)
    runs = encode_cells_rle(cells)
    values = runs[1::2]
    assert all(a != b for a, b in zip(values, values[1:]))


@given(st.lists(st.integers(0, 2), min_size=1, max_size=200))
@settings(max_examples=80)
def test_rle_round_trip_random(flat):
    width = len(flat)
    cells = np.array(flat, dtype=np.uint8).reshape(1, width)
    assert np.array_equal(decode_cells_rle(encode_cells_rle(cells), width, 1), cells)


def test_rle_decode_rejects_garbage():
    with pytest.raises(ProtocolError, match="even"):
        decode_cells_rle([3, 0, 1], 2, 2)
    with pytest.raises(ProtocolError, match="bad rle run"):
        decode_cells_rle([4, 7], 2, 2)
    with pytest.raises(ProtocolError, match="bad rle run"):
        decode_cells_rle([0, 1, 4, 0], 2, 2)
    with pytest.raises(ProtocolError, match="overflows"):
        decode_cells_rle([5, 0], 2, 2)
    with pytest.raises(ProtocolError, match="does not fill"):
        decode_cells_rle([3, 0], 2, 2)


def test_map_payload_round_trip():
    grid = load_map((MAPS / "asym10.map").read_text())
    payload = map_payload(grid)
    assert payload["width"] == grid.width and payload["height"] == grid.height
    decoded = decode_cells_rle(payload["cells_rle"], grid.width, grid.height)
    assert np.array_equal(decoded, grid.cells)


# ------------------------------------------------------------ marginal codec


def test_marginal_codec_round_trip():
    rng = np.random.default_rng(11)
    marginal = rng.random((6, 9))
    marginal /= marginal.sum()
    out = decode_marginal(marginal_b64(marginal), 9, 6)
    assert out.dtype == np.dtype("<f4")
    assert np.array_equal(out, marginal.astype("<f4"))


def test_marginal_codec_size_mismatch():
    b64 = marginal_b64(np.zeros((2, 2)))
    with pytest.raises(ProtocolError, match="size mismatch"):
        decode_marginal(b64, 3, 3)


def test_marginal_codec_rejects_bad_base64():
    with pytest.raises(ValueError):
        decode_marginal("not base64!!", 1, 1)


# ----------------------------------------------------------- client messages


def test_parse_client_valid_messages():
    assert parse_client_message('{"type":"hello","role":"observer"}')["role"] == "observer"
    msg = parse_client_message('{"type":"set_goal","x":1,"y":-2.5}')
    assert (msg["x"], msg["y"]) == (1, -2.5)
    for kind in ("reset", "pause", "resume"):
        assert parse_client_message(json.dumps({"type": kind}))["type"] == kind


@pytest.mark.parametrize(
    "text,match",
    [
        ("{nope", "not valid JSON"),
        ("[1,2]", "missing message type"),
        ('{"role":"operator"}', "missing message type"),
        ('{"type":"warp"}', "unknown type: warp"),
        ('{"type":"hello"}', "hello needs role"),
        ('{"type":"hello","role":"admin"}', "hello needs role"),
        ('{"type":"set_goal","x":1}', "needs numeric x and y"),
        ('{"type":"set_goal","x":"1","y":2}', "needs numeric x and y"),
        ('{"type":"set_goal","x":true,"y":2}', "needs numeric x and y"),
    ],
)
def test_parse_client_rejects(text, match):
    with pytest.raises(ProtocolError, match=match) as err:
        parse_client_message(text)
    assert err.value.code == "bad message"


# ---------------------------------------------------------- server messages


def golden_config() -> SimConfig:
    return SimConfig(
        map_path=str(MAPS / "asym10.map"),
        belief_nx=50,
        belief_ny=50,
        belief_ntheta=8,
        dwa=DwaConfig(v_samples=5, omega_samples=7),
        seed=4,
    )


def golden_welcome_line() -> str:
    grid = load_map((MAPS / "asym10.map").read_text())
    return dumps(welcome_message("operator", grid))


def golden_error_line() -> str:
    return dumps(error_message("operator taken", "another operator is connected"))


def golden_snapshot_line() -> str:
    """Third tick of a fixed seed run, mid-drive: path, trajectories, a moving
    command, debug truth — every snapshot field populated."""
    sim = Simulator(golden_config(), start=Pose(4.5, 4.5, 0.0), debug_truth=True, timing=False)
    sim.step()
    assert sim.set_goal(6.5, 4.5) == (True, "")
    sim.step()
    return dumps(snapshot_message(sim.step()))


def test_snapshot_message_shape():
    sim = Simulator(golden_config(), start=Pose(4.5, 4.5, 0.0), timing=False)
    msg = snapshot_message(sim.step())
    assert msg["type"] == "snapshot"
    assert "true_pose" not in msg  # debug flag off
    assert len(msg["scan"]) == 180
    belief = msg["belief"]
    decoded = decode_marginal(belief["marginal_b64"], belief["nx"], belief["ny"])
    assert abs(float(decoded.sum()) - 1.0) < 1e-6
    parsed = json.loads(dumps(msg))
    assert parsed["state"] == "Idle"
    assert parsed["snippet"] == "a"


def test_golden_welcome():
    assert golden_welcome_line() == (GOLDEN / "welcome.json").read_text()


def test_golden_error():
    assert golden_error_line() == (GOLDEN / "error.json").read_text()


def test_golden_snapshot():
    assert golden_snapshot_line() == (GOLDEN / "snapshot.json").read_text()
