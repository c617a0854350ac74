"""Occupancy-grid world: map I/O, coordinate transforms, ray casting, inflation.

Grid convention: cells[iy, ix] covers the world rectangle
[origin_x + ix*res, origin_x + (ix+1)*res) x [origin_y + iy*res, origin_y + (iy+1)*res),
so row 0 is the lowest-y row. Map files are written top row first (picture order)
and flipped on load.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum
from typing import Optional

import numpy as np
from scipy.ndimage import distance_transform_edt


class CellState(IntEnum):
    FREE = 0
    OCCUPIED = 1
    UNKNOWN = 2


_CELL_CHARS = {".": CellState.FREE, "#": CellState.OCCUPIED, "?": CellState.UNKNOWN}
_CHAR_FOR_CELL = {v: k for k, v in _CELL_CHARS.items()}


class MapParseError(ValueError):
    """Raised for malformed map files; message names the offending line."""


def wrap_angle(theta: float) -> float:
    """Normalize an angle to [-pi, pi)."""
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class Pose:
    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    resolution: float
    origin: tuple[float, float]
    cells: np.ndarray  # (height, width) uint8 of CellState, read-only

    def __post_init__(self) -> None:
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.cells.shape != (self.height, self.width):
            raise ValueError("cells shape does not match width/height")
        self.cells.flags.writeable = False

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def world_to_grid(self, x: float, y: float) -> Optional[tuple[int, int]]:
        """Cell index containing a world point, or None if out of bounds."""
        ix = math.floor((x - self.origin[0]) / self.resolution)
        iy = math.floor((y - self.origin[1]) / self.resolution)
        if not self.in_bounds(ix, iy):
            return None
        return ix, iy

    def grid_to_world(self, ix: int, iy: int) -> tuple[float, float]:
        """World coordinates of a cell center."""
        return (
            self.origin[0] + (ix + 0.5) * self.resolution,
            self.origin[1] + (iy + 0.5) * self.resolution,
        )

    def is_free(self, ix: int, iy: int) -> bool:
        return self.in_bounds(ix, iy) and self.cells[iy, ix] == CellState.FREE

    def is_free_world(self, x: float, y: float) -> bool:
        ij = self.world_to_grid(x, y)
        return ij is not None and self.cells[ij[1], ij[0]] == CellState.FREE


@dataclass(frozen=True)
class ScanConfig:
    """Laser sweep geometry. Beam i points at robot-relative angle
    -pi + i*angle_increment; defaults cover a full 360-degree sweep."""

    beam_count: int = 180
    angle_increment: float = math.pi / 90.0
    max_range: float = 10.0

    def beam_offset(self, i: int) -> float:
        return -math.pi + i * self.angle_increment


@dataclass(frozen=True)
class LaserScan:
    ranges: np.ndarray
    config: ScanConfig = field(default_factory=ScanConfig)

    def __post_init__(self) -> None:
        if len(self.ranges) != self.config.beam_count:
            raise ValueError("ranges length does not match beam_count")
        self.ranges.flags.writeable = False


def load_map(text: str) -> GridMap:
    """Parse a map file: resolution/origin header, blank line, then cell rows."""
    lines = text.splitlines()
    resolution: Optional[float] = None
    origin: Optional[tuple[float, float]] = None
    body_start = None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            body_start = lineno  # rows begin after the blank separator
            break
        key, sep, value = stripped.partition(":")
        if not sep:
            raise MapParseError(f"line {lineno}: expected 'key: value' header, got {stripped!r}")
        key = key.strip()
        if key == "resolution":
            try:
                resolution = float(value)
            except ValueError:
                raise MapParseError(f"line {lineno}: resolution is not a number") from None
            if resolution <= 0:
                raise MapParseError(f"line {lineno}: resolution must be positive")
        elif key == "origin":
            parts = value.split()
            if len(parts) != 2:
                raise MapParseError(f"line {lineno}: origin needs two numbers")
            try:
                origin = (float(parts[0]), float(parts[1]))
            except ValueError:
                raise MapParseError(f"line {lineno}: origin is not numeric") from None
        else:
            raise MapParseError(f"line {lineno}: unknown header key {key!r}")
    if resolution is None:
        raise MapParseError("missing header: resolution")
    if origin is None:
        raise MapParseError("missing header: origin")

    rows: list[tuple[int, str]] = []
    if body_start is not None:
        for lineno, line in enumerate(lines[body_start:], start=body_start + 1):
            if line.strip():
                rows.append((lineno, line.rstrip("\n")))
    if not rows:
        raise MapParseError("no rows")

    width = len(rows[0][1])
    height = len(rows)
    cells = np.empty((height, width), dtype=np.uint8)
    for text_row, (lineno, row) in enumerate(rows):
        if len(row) != width:
            raise MapParseError(f"line {lineno}: row width {len(row)} != {width}")
        iy = height - 1 - text_row  # top text row is the highest y
        for ix, ch in enumerate(row):
            state = _CELL_CHARS.get(ch)
            if state is None:
                raise MapParseError(f"line {lineno}: unknown cell character {ch!r}")
            cells[iy, ix] = state
    return GridMap(width=width, height=height, resolution=resolution, origin=origin, cells=cells)


def dump_map(grid: GridMap) -> str:
    """Inverse of load_map (fixture generation helper)."""
    header = f"resolution: {grid.resolution!r}\norigin: {grid.origin[0]!r} {grid.origin[1]!r}\n\n"
    rows = []
    for iy in range(grid.height - 1, -1, -1):
        rows.append("".join(_CHAR_FOR_CELL[CellState(c)] for c in grid.cells[iy]))
    return header + "\n".join(rows) + "\n"


def ray_cast(grid: GridMap, x: float, y: float, angle: float, max_range: float) -> float:
    """Distance along the ray to the first non-free cell boundary, or max_range.

    Exact incremental grid traversal; the returned distance is where the ray
    crosses into the blocking cell. Leaving the map counts as no hit.
    """
    start = grid.world_to_grid(x, y)
    if start is None:
        raise ValueError("ray origin outside map")
    ix, iy = start
    if grid.cells[iy, ix] != CellState.FREE:
        raise ValueError("ray origin inside obstacle")

    dx = math.cos(angle)
    dy = math.sin(angle)
    res = grid.resolution
    inf = math.inf

    step_x = 1 if dx > 0 else -1
    if dx == 0.0:
        t_max_x, t_delta_x = inf, inf
    else:
        next_bx = grid.origin[0] + (ix + (1 if dx > 0 else 0)) * res
        t_max_x = (next_bx - x) / dx
        t_delta_x = res / abs(dx)
    step_y = 1 if dy > 0 else -1
    if dy == 0.0:
        t_max_y, t_delta_y = inf, inf
    else:
        next_by = grid.origin[1] + (iy + (1 if dy > 0 else 0)) * res
        t_max_y = (next_by - y) / dy
        t_delta_y = res / abs(dy)

    while True:
        if t_max_x < t_max_y:
            t = t_max_x
            ix += step_x
            t_max_x += t_delta_x
        else:
            t = t_max_y
            iy += step_y
            t_max_y += t_delta_y
        if t > max_range:
            return max_range
        if not grid.in_bounds(ix, iy):
            return max_range
        if grid.cells[iy, ix] != CellState.FREE:
            return t


# Lower clamp keeping simulated ranges strictly positive after noise.
MIN_RANGE = 1e-3


def _cast_fan(
    grid: GridMap, x: float, y: float, angles: list[float], max_range: float
) -> np.ndarray:
    """All beams of ray_cast from one origin, marched in lockstep.

    Per-beam arithmetic (including the scalar trig) matches ray_cast op for
    op, so each returned range is bit-identical to the scalar caster.
    """
    start = grid.world_to_grid(x, y)
    if start is None:
        raise ValueError("ray origin outside map")
    ix0, iy0 = start
    if grid.cells[iy0, ix0] != CellState.FREE:
        raise ValueError("ray origin inside obstacle")

    dx = np.array([math.cos(a) for a in angles])
    dy = np.array([math.sin(a) for a in angles])
    res = grid.resolution
    ox, oy = grid.origin

    with np.errstate(divide="ignore", invalid="ignore"):
        t_max_x = np.where(dx != 0.0, (ox + (ix0 + (dx > 0)) * res - x) / dx, math.inf)
        t_delta_x = np.where(dx != 0.0, res / np.abs(dx), math.inf)
        t_max_y = np.where(dy != 0.0, (oy + (iy0 + (dy > 0)) * res - y) / dy, math.inf)
        t_delta_y = np.where(dy != 0.0, res / np.abs(dy), math.inf)
    step_x = np.where(dx > 0, 1, -1)
    step_y = np.where(dy > 0, 1, -1)

    n = len(angles)
    ix = np.full(n, ix0, dtype=np.int64)
    iy = np.full(n, iy0, dtype=np.int64)
    out = np.empty(n, dtype=np.float64)
    active = np.ones(n, dtype=bool)
    while active.any():
        cond = t_max_x < t_max_y
        t = np.where(cond, t_max_x, t_max_y)
        adv_x = active & cond
        adv_y = active & ~cond
        ix = np.where(adv_x, ix + step_x, ix)
        iy = np.where(adv_y, iy + step_y, iy)
        t_max_x = np.where(adv_x, t_max_x + t_delta_x, t_max_x)
        t_max_y = np.where(adv_y, t_max_y + t_delta_y, t_max_y)

        over = t > max_range
        oob = (ix < 0) | (ix >= grid.width) | (iy < 0) | (iy >= grid.height)
        cx = np.clip(ix, 0, grid.width - 1)
        cy = np.clip(iy, 0, grid.height - 1)
        blocked = grid.cells[cy, cx] != CellState.FREE
        miss = active & (over | oob)
        hit = active & ~over & ~oob & blocked
        out[miss] = max_range
        out[hit] = t[hit]
        active &= ~(miss | hit)
    return out


def simulate_scan(
    grid: GridMap,
    true_pose: Pose,
    cfg: ScanConfig,
    noise_sigma: float,
    rng: np.random.Generator,
) -> LaserScan:
    """Cast one beam per configured angle from the true pose, with optional
    Gaussian range noise clamped to (0, max_range]."""
    angles = [true_pose.theta + cfg.beam_offset(i) for i in range(cfg.beam_count)]
    ranges = _cast_fan(grid, true_pose.x, true_pose.y, angles, cfg.max_range)
    if noise_sigma > 0.0:
        ranges += rng.normal(0.0, noise_sigma, size=cfg.beam_count)
        np.clip(ranges, MIN_RANGE, cfg.max_range, out=ranges)
    return LaserScan(ranges=ranges, config=cfg)


def occupancy_distances(grid: GridMap, include_unknown: bool = False) -> np.ndarray:
    """Per-cell Euclidean distance (meters) between cell centers and the
    nearest blocked cell center. Exact: computed in cell units, then scaled."""
    blocked = grid.cells == CellState.OCCUPIED
    if include_unknown:
        blocked |= grid.cells == CellState.UNKNOWN
    if not blocked.any():
        return np.full((grid.height, grid.width), math.inf)
    dist_cells = distance_transform_edt(~blocked)
    return dist_cells * grid.resolution


def inflate_obstacles(grid: GridMap, radius: float) -> GridMap:
    """Grow obstacles: free cells within radius of an occupied or unknown cell
    center become occupied. Unknown cells are kept as-is (they already block)."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    dist = occupancy_distances(grid, include_unknown=True)
    cells = grid.cells.copy()
    cells[(cells == CellState.FREE) & (dist <= radius)] = CellState.OCCUPIED
    return GridMap(
        width=grid.width,
        height=grid.height,
        resolution=grid.resolution,
        origin=grid.origin,
        cells=cells,
    )
