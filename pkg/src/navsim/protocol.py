"""Session wire protocol: JSON text messages over a bidirectional channel.

Serialization is canonical (sorted keys, compact separators, floats rounded
to 9 decimals) so message bytes are reproducible and golden files stay
stable. The belief marginal rides as base64 little-endian float32 in
row-major y-then-x order; everything else is plain decimal.

Client -> server: hello{role}, set_goal{x, y}, reset, pause, resume.
Server -> client: welcome{role, map}, snapshot{...}, error{code, message}.
"""

from __future__ import annotations

import base64
import json
from typing import Any

import numpy as np

from .sim import Snapshot
from .world import GridMap

CLIENT_TYPES = ("hello", "set_goal", "reset", "pause", "resume")
ROLES = ("operator", "observer")


class ProtocolError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(f"{code}: {message}")
        self.code = code
        self.message = message


def _canonical(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, float):
        rounded = round(value, 9)
        return 0.0 if rounded == 0 else rounded
    if isinstance(value, dict):
        return {k: _canonical(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    return value


def dumps(message: dict) -> str:
    """Canonical JSON encoding used for every server-sent message."""
    return json.dumps(_canonical(message), separators=(",", ":"), sort_keys=True)


# ------------------------------------------------------------------ map RLE


def encode_cells_rle(cells: np.ndarray) -> list[int]:
    """Row-major [count, value, count, value, ...] with the bottom row first."""
    flat = cells.ravel()
    runs: list[int] = []
    start = 0
    for i in range(1, len(flat) + 1):
        if i == len(flat) or flat[i] != flat[start]:
            runs.extend((i - start, int(flat[start])))
            start = i
    return runs


def decode_cells_rle(runs: list[int], width: int, height: int) -> np.ndarray:
    if len(runs) % 2 != 0:
        raise ProtocolError("bad message", "rle length must be even")
    out = np.empty(width * height, dtype=np.uint8)
    pos = 0
    for count, value in zip(runs[::2], runs[1::2]):
        if count <= 0 or value not in (0, 1, 2):
            raise ProtocolError("bad message", "bad rle run")
        if pos + count > out.size:
            raise ProtocolError("bad message", "rle overflows the map")
        out[pos : pos + count] = value
        pos += count
    if pos != out.size:
        raise ProtocolError("bad message", "rle does not fill the map")
    return out.reshape(height, width)


def map_payload(grid: GridMap) -> dict:
    return {
        "width": grid.width,
        "height": grid.height,
        "resolution": grid.resolution,
        "origin": list(grid.origin),
        "cells_rle": encode_cells_rle(grid.cells),
    }


# ----------------------------------------------------------- server messages


def welcome_message(role: str, grid: GridMap) -> dict:
    return {"type": "welcome", "role": role, "map": map_payload(grid)}


def error_message(code: str, message: str) -> dict:
    return {"type": "error", "code": code, "message": message}


def marginal_b64(marginal: np.ndarray) -> str:
    return base64.b64encode(
        np.ascontiguousarray(marginal, dtype="<f4").tobytes()
    ).decode("ascii")


def decode_marginal(b64: str, nx: int, ny: int) -> np.ndarray:
    raw = base64.b64decode(b64.encode("ascii"), validate=True)
    if len(raw) != 4 * nx * ny:
        raise ProtocolError("bad message", "marginal size mismatch")
    return np.frombuffer(raw, dtype="<f4").reshape(ny, nx)


def snapshot_message(snap: Snapshot) -> dict:
    msg = {
        "type": "snapshot",
        "tick": snap.tick,
        "sim_time": snap.sim_time,
        "estimate": [snap.estimate.x, snap.estimate.y, snap.estimate.theta],
        "confidence": snap.confidence,
        "entropy": snap.entropy,
        "scan": [[x, y] for x, y in snap.scan_endpoints],
        "belief": {
            "nx": snap.belief_nx,
            "ny": snap.belief_ny,
            "xy_resolution": snap.belief_xy_resolution,
            "origin": list(snap.belief_origin),
            "marginal_b64": marginal_b64(snap.marginal),
        },
        "path": [[x, y] for x, y in snap.path],
        "trajectories": [
            {
                "v": t.v,
                "omega": t.omega,
                "points": [[x, y] for x, y in t.points],
                "admissible": t.admissible,
                "score": t.score,
            }
            for t in snap.trajectories
        ],
        "selected": {"v": snap.selected.v, "omega": snap.selected.omega},
        "state": snap.state.value,
        "snippet": snap.snippet,
        "timings_ms": dict(snap.timings_ms),
        "warnings": list(snap.warnings),
    }
    if snap.true_pose is not None:
        msg["true_pose"] = [snap.true_pose.x, snap.true_pose.y, snap.true_pose.theta]
    return msg


# ----------------------------------------------------------- client messages


def parse_client_message(text: str) -> dict:
    """Validate one client message; raises ProtocolError on anything off."""
    try:
        msg = json.loads(text)
    except json.JSONDecodeError:
        raise ProtocolError("bad message", "not valid JSON") from None
    if not isinstance(msg, dict) or not isinstance(msg.get("type"), str):
        raise ProtocolError("bad message", "missing message type")
    kind = msg["type"]
    if kind not in CLIENT_TYPES:
        raise ProtocolError("bad message", f"unknown type: {kind}")
    if kind == "hello":
        if msg.get("role") not in ROLES:
            raise ProtocolError("bad message", "hello needs role operator|observer")
    if kind == "set_goal":
        for key in ("x", "y"):
            if isinstance(msg.get(key), bool) or not isinstance(msg.get(key), (int, float)):
                raise ProtocolError("bad message", "set_goal needs numeric x and y")
    return msg
