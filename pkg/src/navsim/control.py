"""Dynamic Window Approach: sample reachable velocities, roll out arcs, score
heading/clearance/velocity, pick the best admissible command.

Clearance comes from a precomputed distance field sampled at rollout poses; a
command is admissible when the robot could still brake to a stop inside its
clearance. When nothing is admissible the fallback is a rotation in place
toward the target, which cannot create a collision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .world import CellState, GridMap, Pose, occupancy_distances, wrap_angle

# Below this |omega| the arc equations degenerate; integrate straight-line.
OMEGA_STRAIGHT = 1e-6


@dataclass(frozen=True)
class KinematicLimits:
    v_max: float = 0.8
    v_min: float = 0.0
    omega_max: float = 1.0
    accel_v: float = 0.5
    accel_omega: float = 2.0
    robot_radius: float = 0.3

    def __post_init__(self) -> None:
        if self.v_min < 0 or self.v_min > self.v_max:
            raise ValueError("need 0 <= v_min <= v_max")
        if min(self.v_max, self.omega_max, self.accel_v, self.accel_omega, self.robot_radius) <= 0:
            raise ValueError("limits must be positive")


@dataclass(frozen=True)
class VelocityCommand:
    v: float = 0.0
    omega: float = 0.0


@dataclass(frozen=True)
class DwaConfig:
    alpha: float = 0.8  # heading
    beta: float = 0.1  # clearance
    gamma: float = 0.1  # velocity
    dt: float = 0.1
    # short enough that omega_max cannot wrap an arc past pi/2, otherwise the
    # end-of-rollout heading score has orbiting local optima
    sim_horizon: float = 0.8
    v_samples: int = 11
    omega_samples: int = 21
    clearance_cap: float = 2.0

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma) < 0 or self.alpha + self.beta + self.gamma == 0:
            raise ValueError("weights must be >= 0 and not all zero")
        if self.dt <= 0 or self.sim_horizon < self.dt:
            raise ValueError("need dt > 0 and sim_horizon >= dt")
        if self.v_samples < 2 or self.omega_samples < 2:
            raise ValueError("need at least 2 samples per axis")


@dataclass(frozen=True)
class Trajectory:
    command: VelocityCommand
    poses: tuple[Pose, ...]
    min_clearance: float
    score: float
    admissible: bool


def dynamic_window(
    current: VelocityCommand, limits: KinematicLimits, dt: float
) -> tuple[float, float, float, float]:
    """(v_lo, v_hi, omega_lo, omega_hi) reachable within one dt."""
    return (
        max(limits.v_min, current.v - limits.accel_v * dt),
        min(limits.v_max, current.v + limits.accel_v * dt),
        max(-limits.omega_max, current.omega - limits.accel_omega * dt),
        min(limits.omega_max, current.omega + limits.accel_omega * dt),
    )


def rollout(pose: Pose, cmd: VelocityCommand, horizon: float, step: float) -> tuple[Pose, ...]:
    """Constant-velocity unicycle poses at t = 0, step, ..., horizon (closed
    form, so long horizons carry no integration error)."""
    if step <= 0 or horizon < step:
        raise ValueError("need step > 0 and horizon >= step")
    n = int(round(horizon / step))
    poses = [pose]
    for k in range(1, n + 1):
        t = k * step
        if abs(cmd.omega) > OMEGA_STRAIGHT:
            radius = cmd.v / cmd.omega
            theta_t = pose.theta + cmd.omega * t
            poses.append(
                Pose(
                    pose.x + radius * (math.sin(theta_t) - math.sin(pose.theta)),
                    pose.y - radius * (math.cos(theta_t) - math.cos(pose.theta)),
                    theta_t,
                )
            )
        else:
            poses.append(
                Pose(
                    pose.x + cmd.v * t * math.cos(pose.theta),
                    pose.y + cmd.v * t * math.sin(pose.theta),
                    pose.theta,
                )
            )
    return tuple(poses)


def admissible(cmd: VelocityCommand, clearance: float, limits: KinematicLimits) -> bool:
    """Stopping criterion: the robot can brake to rest within its clearance."""
    if clearance < 0:
        return False
    return cmd.v <= math.sqrt(2.0 * clearance * limits.accel_v)


def clearance_field(grid: GridMap) -> np.ndarray:
    """Distance from each cell center to the nearest blocked cell (unknown
    counts: the controller must not drive into unmapped space)."""
    return occupancy_distances(grid, include_unknown=True)


def _pose_clearance(
    grid: GridMap, distances: np.ndarray, pose: Pose, robot_radius: float
) -> float:
    ij = grid.world_to_grid(pose.x, pose.y)
    if ij is None or grid.cells[ij[1], ij[0]] != CellState.FREE:
        return -math.inf
    return float(distances[ij[1], ij[0]]) - robot_radius


def _batch_clearance(
    grid: GridMap, distances: np.ndarray, xs: np.ndarray, ys: np.ndarray, robot_radius: float
) -> np.ndarray:
    """_pose_clearance over position arrays; elementwise-identical math."""
    ix = np.floor((xs - grid.origin[0]) / grid.resolution).astype(np.int64)
    iy = np.floor((ys - grid.origin[1]) / grid.resolution).astype(np.int64)
    inb = (ix >= 0) & (ix < grid.width) & (iy >= 0) & (iy < grid.height)
    cx = np.clip(ix, 0, grid.width - 1)
    cy = np.clip(iy, 0, grid.height - 1)
    ok = inb & (grid.cells[cy, cx] == CellState.FREE)
    return np.where(ok, distances[cy, cx] - robot_radius, -math.inf)


def select_command(
    pose: Pose,
    current: VelocityCommand,
    target: tuple[float, float],
    grid: GridMap,
    limits: KinematicLimits,
    cfg: DwaConfig,
    distances: Optional[np.ndarray] = None,
) -> tuple[VelocityCommand, list[Trajectory]]:
    """Best admissible sampled command and every evaluated trajectory.

    Raw objective terms are sum-normalized across admissible candidates before
    weighting; ties go to the lower (v, omega) pair. With no admissible
    candidate the command is a stop plus rotation toward the target.
    """
    if distances is None:
        distances = clearance_field(grid)
    if _pose_clearance(grid, distances, pose, 0.0) == -math.inf:
        raise ValueError("robot in collision")

    v_lo, v_hi, w_lo, w_hi = dynamic_window(current, limits, cfg.dt)
    vs = [v_lo + k * (v_hi - v_lo) / (cfg.v_samples - 1) for k in range(cfg.v_samples)]
    ws = [w_lo + k * (w_hi - w_lo) / (cfg.omega_samples - 1) for k in range(cfg.omega_samples)]

    rollouts = []
    for v in vs:
        for w in ws:
            cmd = VelocityCommand(v=v, omega=w)
            rollouts.append((cmd, rollout(pose, cmd, cfg.sim_horizon, cfg.dt)))
    xs = np.array([[p.x for p in poses] for _, poses in rollouts])
    ys = np.array([[p.y for p in poses] for _, poses in rollouts])
    clears = _batch_clearance(grid, distances, xs, ys, limits.robot_radius).min(axis=1)

    candidates = []  # (cmd, poses, min_clearance, admissible, raw heading/clearance/velocity)
    for (cmd, poses), clear in zip(rollouts, clears):
        clear = float(clear)
        ok = clear >= 0 and admissible(cmd, clear, limits)
        final = poses[-1]
        bearing_err = abs(
            wrap_angle(math.atan2(target[1] - final.y, target[0] - final.x) - final.theta)
        )
        heading_raw = (math.pi - bearing_err) / math.pi
        clear_raw = min(max(clear, 0.0), cfg.clearance_cap) / cfg.clearance_cap
        vel_raw = cmd.v / limits.v_max
        candidates.append((cmd, poses, clear, ok, heading_raw, clear_raw, vel_raw))

    sums = [0.0, 0.0, 0.0]
    for _, _, _, ok, h, c, vel in candidates:
        if ok:
            sums[0] += h
            sums[1] += c
            sums[2] += vel

    def norm(value, total):
        return value / total if total > 0 else 0.0

    best_cmd: Optional[VelocityCommand] = None
    best_score = -math.inf
    trajectories = []
    for cmd, poses, clear, ok, h, c, vel in candidates:
        score = (
            cfg.alpha * norm(h, sums[0])
            + cfg.beta * norm(c, sums[1])
            + cfg.gamma * norm(vel, sums[2])
        )
        trajectories.append(
            Trajectory(
                command=cmd, poses=poses, min_clearance=clear, score=score, admissible=ok
            )
        )
        # candidates iterate in ascending (v, omega): strict > keeps the lowest tie
        if ok and score > best_score:
            best_score = score
            best_cmd = cmd

    if best_cmd is None:
        bearing = wrap_angle(math.atan2(target[1] - pose.y, target[0] - pose.x) - pose.theta)
        spin = math.copysign(min(limits.omega_max, limits.accel_omega * cfg.dt), bearing)
        best_cmd = VelocityCommand(v=0.0, omega=spin if bearing != 0.0 else 0.0)
    return best_cmd, trajectories
