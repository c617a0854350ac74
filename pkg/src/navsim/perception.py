"""Likelihood-field measurement model.

A distance transform over the map is built once; scan likelihood is then a
per-beam table lookup. Both the scalar scorer here and the vectorized belief
update in localization read the same precomputed log-mixture table, so they
agree bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .world import CellState, GridMap, LaserScan, Pose, occupancy_distances

SQRT_2PI = math.sqrt(2.0 * math.pi)

# Floor added to the max-range weight so ln() stays finite at z_max_weight=0.
MAX_RANGE_EPS = 1e-9

# Exact ray casts put endpoints on the entry boundary of the blocking cell;
# bias containment along the beam (in cell units) so the lookup lands in the
# cell the beam hit instead of the free cell it left.
EDGE_NUDGE = 1e-9


@dataclass(frozen=True)
class SensorModelConfig:
    sigma_hit: float = 0.2
    z_hit: float = 0.9
    z_rand: float = 0.09
    z_max_weight: float = 0.01
    beam_stride: int = 6

    def __post_init__(self) -> None:
        if abs(self.z_hit + self.z_rand + self.z_max_weight - 1.0) > 1e-9:
            raise ValueError("mixture weights must sum to 1")
        if self.sigma_hit <= 0:
            raise ValueError("sigma_hit must be positive")
        if self.beam_stride < 1:
            raise ValueError("beam_stride must be >= 1")


@dataclass(frozen=True)
class LikelihoodField:
    """Distance (meters) from each cell center to the nearest occupied cell
    center, plus cached log-mixture tables keyed by scan max_range."""

    distance: np.ndarray  # (height, width)
    width: int
    height: int
    resolution: float
    origin: tuple[float, float]
    config: SensorModelConfig
    max_distance: float
    _tables: dict = dc_field(default_factory=dict, repr=False, compare=False)

    def log_tables(self, max_range: float) -> tuple[np.ndarray, float, float]:
        """(ln_q grid, ln_q for endpoints outside the map, ln_q for max-range
        beams). The outside value uses the field maximum as the distance."""
        cached = self._tables.get(max_range)
        if cached is not None:
            return cached
        cfg = self.config
        norm = cfg.z_hit / (SQRT_2PI * cfg.sigma_hit)
        floor = cfg.z_rand / max_range
        ln_q = np.log(norm * np.exp(-0.5 * (self.distance / cfg.sigma_hit) ** 2) + floor)
        ln_q_outside = float(
            np.log(norm * np.exp(-0.5 * (self.max_distance / cfg.sigma_hit) ** 2) + floor)
        )
        ln_q_max = math.log(cfg.z_max_weight + MAX_RANGE_EPS)
        ln_q.flags.writeable = False
        self._tables[max_range] = (ln_q, ln_q_outside, ln_q_max)
        return self._tables[max_range]


def build_likelihood_field(grid: GridMap, cfg: SensorModelConfig) -> LikelihoodField:
    """Exact Euclidean distance transform to the nearest occupied cell."""
    if not (grid.cells == CellState.OCCUPIED).any():
        raise ValueError("field undefined: no obstacles")
    dist = occupancy_distances(grid, include_unknown=False)
    dist.flags.writeable = False
    return LikelihoodField(
        distance=dist,
        width=grid.width,
        height=grid.height,
        resolution=grid.resolution,
        origin=grid.origin,
        config=cfg,
        max_distance=float(dist.max()),
    )


def beam_endpoint(pose: Pose, beam_angle_offset: float, range_m: float) -> tuple[float, float]:
    a = pose.theta + beam_angle_offset
    return pose.x + range_m * math.cos(a), pose.y + range_m * math.sin(a)


def scan_log_likelihood(
    field: LikelihoodField, grid: GridMap, hypothesis: Pose, scan: LaserScan
) -> float:
    """Sum of per-beam log mixture densities, stepping by beam_stride.

    Max-range beams score a constant; endpoints off the map use the field
    maximum distance. Always finite: the mixture has a z_rand floor.
    """
    cfg = scan.config
    ln_q, ln_q_outside, ln_q_max = field.log_tables(cfg.max_range)
    ox, oy = field.origin
    res = field.resolution
    total = 0.0
    for i in range(0, cfg.beam_count, field.config.beam_stride):
        r = scan.ranges[i]
        if r >= cfg.max_range:
            total += ln_q_max
            continue
        a = hypothesis.theta + cfg.beam_offset(i)
        cos_a = math.cos(a)
        sin_a = math.sin(a)
        ex = hypothesis.x + r * cos_a
        ey = hypothesis.y + r * sin_a
        ix = math.floor((ex - ox) / res + EDGE_NUDGE * cos_a)
        iy = math.floor((ey - oy) / res + EDGE_NUDGE * sin_a)
        if 0 <= ix < field.width and 0 <= iy < field.height:
            total += ln_q[iy, ix]
        else:
            total += ln_q_outside
    return float(total)
