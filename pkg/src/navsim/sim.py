"""Simulation loop: ground-truth kinematics, noisy odometry, scanning, grid
localization, planning, local control, and the exhibit state machine.

Each tick runs sense -> localize -> plan -> act and emits an immutable
Snapshot. The sim clock is fixed-step virtual time; pacing to wall clock is
the server's job, headless runs go flat out.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .config import SimConfig
from .control import VelocityCommand, clearance_field, rollout, select_command
from .exhibit import ExhibitState, snippet_for
from .localization import (
    BeliefGrid,
    OdometryDelta,
    apply_odometry,
    correct,
    decompose_odometry,
    estimate,
    init_uniform,
    is_converged,
    motion_stds,
    predict,
)
from .perception import build_likelihood_field
from .planning import next_waypoint, plan, prune_path
from .world import (
    CellState,
    GridMap,
    Pose,
    inflate_obstacles,
    load_map,
    simulate_scan,
    wrap_angle,
)

STAGES = ("sense", "localize", "plan", "act")


@dataclass(frozen=True)
class TrajectoryView:
    """A candidate rollout reduced to what the observer view needs."""

    v: float
    omega: float
    points: tuple[tuple[float, float], ...]  # decimated to <= 10
    admissible: bool
    score: float


@dataclass(frozen=True)
class Snapshot:
    tick: int
    sim_time: float
    true_pose: Optional[Pose]  # present only with the debug-truth flag
    estimate: Pose
    confidence: float
    entropy: float
    scan_endpoints: tuple[tuple[float, float], ...]
    marginal: np.ndarray  # (ny, nx) row-major xy belief marginal
    belief_nx: int
    belief_ny: int
    belief_xy_resolution: float
    belief_origin: tuple[float, float]
    path: tuple[tuple[float, float], ...]
    trajectories: tuple[TrajectoryView, ...]
    selected: VelocityCommand
    state: ExhibitState
    snippet: str
    timings_ms: dict[str, float]
    warnings: tuple[str, ...]


def _decimate(poses: tuple[Pose, ...], limit: int = 10) -> tuple[tuple[float, float], ...]:
    n = len(poses)
    if n <= limit:
        return tuple((p.x, p.y) for p in poses)
    idx = [round(k * (n - 1) / (limit - 1)) for k in range(limit)]
    return tuple((poses[i].x, poses[i].y) for i in idx)


def _perturb_delta(
    delta: OdometryDelta, noise, rng: np.random.Generator
) -> OdometryDelta:
    """Odometry noise in delta space so it matches the filter's motion model."""
    s_rot1, s_trans, s_rot2 = motion_stds(delta, noise)
    return OdometryDelta(
        delta_rot1=delta.delta_rot1 + s_rot1 * rng.standard_normal(),
        delta_trans=max(0.0, delta.delta_trans + s_trans * rng.standard_normal()),
        delta_rot2=delta.delta_rot2 + s_rot2 * rng.standard_normal(),
    )


def default_start(grid: GridMap) -> Pose:
    """Free cell center nearest the map center (lowest index on ties)."""
    free = np.argwhere(grid.cells == CellState.FREE)
    if len(free) == 0:
        raise ValueError("map has no free cells")
    cx, cy = (grid.width - 1) / 2.0, (grid.height - 1) / 2.0
    d2 = (free[:, 1] - cx) ** 2 + (free[:, 0] - cy) ** 2
    iy, ix = free[int(np.argmin(d2))]
    x, y = grid.grid_to_world(int(ix), int(iy))
    return Pose(x, y, 0.0)


class Simulator:
    """Owns all mutable simulation state; step() is the only mutator besides
    set_goal() and reset()."""

    def __init__(
        self,
        cfg: SimConfig,
        start: Optional[Pose] = None,
        debug_truth: bool = False,
        timing: bool = True,
    ):
        self.cfg = cfg
        self.grid = load_map(Path(cfg.map_path).read_text())
        self.field = build_likelihood_field(self.grid, cfg.sensor)
        self.debug_truth = debug_truth
        self.timing = timing

        self.true_pose = start if start is not None else default_start(self.grid)
        ij = self.grid.world_to_grid(self.true_pose.x, self.true_pose.y)
        if ij is None or self.grid.cells[ij[1], ij[0]] != CellState.FREE:
            raise ValueError("start pose inside obstacle")

        self.belief = self._uniform_belief()
        # The pose handed to the controller is quantized to a belief cell
        # center, so the true pose can sit half a cell diagonal away from it.
        # The clearance field is biased by that slack, and planning inflates
        # by an extra slack + belief cell so A* cannot produce paths hugging
        # space the controller will refuse to drive through.
        slack = 0.5 * math.sqrt(2.0) * self.belief.xy_resolution
        self.inflated = inflate_obstacles(
            self.grid, cfg.limits.robot_radius + slack + self.belief.xy_resolution
        )
        self.distances = np.maximum(clearance_field(self.grid) - slack, 0.0)
        self.rng = np.random.default_rng(cfg.seed)
        self.cmd = VelocityCommand()
        self.state = ExhibitState.IDLE
        self.goal: Optional[tuple[float, float]] = None
        self.path = None
        self.tick = 0
        self.sim_time = 0.0
        # dead-reckoned odometry frame; predict runs once enough motion accrues
        self.odom_pose = Pose(0.0, 0.0, 0.0)
        self.last_predict_odom = self.odom_pose
        self.navigating_since = 0.0

    def _uniform_belief(self) -> BeliefGrid:
        nx = self.cfg.belief_nx or self.grid.width
        ny = self.cfg.belief_ny or self.grid.height
        return init_uniform(self.grid, nx, ny, self.cfg.belief_ntheta)

    # ------------------------------------------------------------- commands

    def set_goal(self, x: float, y: float) -> tuple[bool, str]:
        """Accept iff (x, y) is a Free cell of the inflated map."""
        ij = self.inflated.world_to_grid(x, y)
        if ij is None:
            return False, "out of bounds"
        if self.inflated.cells[ij[1], ij[0]] != CellState.FREE:
            return False, "inside obstacle"
        self.goal = (x, y)
        self.path = None  # preemption never leaves a stale path
        self.state = ExhibitState.GOAL_RECEIVED
        if self.cfg.reset_belief_on_goal:
            self.belief = self._uniform_belief()
            self.last_predict_odom = self.odom_pose
        return True, ""

    def reset(self) -> None:
        """Back to Idle with a fresh uniform belief; the robot stays put."""
        self.state = ExhibitState.IDLE
        self.goal = None
        self.path = None
        self.cmd = VelocityCommand()
        self.belief = self._uniform_belief()
        self.last_predict_odom = self.odom_pose

    # ----------------------------------------------------------------- step

    def step(self) -> Snapshot:
        cfg = self.cfg
        dt = cfg.dt
        warnings: list[str] = []
        timings = dict.fromkeys(STAGES, 0.0)
        clock = time.perf_counter if self.timing else (lambda: 0.0)

        # sense: integrate truth, accumulate noisy odometry, scan
        t0 = clock()
        new_true = rollout(self.true_pose, self.cmd, dt, dt)[-1]
        ij = self.grid.world_to_grid(new_true.x, new_true.y)
        if ij is None or self.grid.cells[ij[1], ij[0]] != CellState.FREE:
            # bumper contact: the wall stops the base, rotation still happens
            new_true = Pose(self.true_pose.x, self.true_pose.y, new_true.theta)
            warnings.append("bump")
        true_delta = decompose_odometry(self.true_pose, new_true)
        noisy = _perturb_delta(true_delta, cfg.odom_noise, self.rng)
        self.odom_pose = apply_odometry(self.odom_pose, noisy)
        self.true_pose = new_true
        scan = simulate_scan(self.grid, self.true_pose, cfg.scan, cfg.scan_noise_sigma, self.rng)
        timings["sense"] = (clock() - t0) * 1e3

        # localize: predict once enough odometry accrues, correct every tick
        t0 = clock()
        pending = decompose_odometry(self.last_predict_odom, self.odom_pose)
        rot_total = abs(wrap_angle(self.odom_pose.theta - self.last_predict_odom.theta))
        try:
            if (
                pending.delta_trans >= 0.5 * self.belief.xy_resolution
                or rot_total >= 0.5 * self.belief.theta_resolution
            ):
                self.belief = predict(self.belief, pending, cfg.motion_noise)
                self.last_predict_odom = self.odom_pose
                pending = OdometryDelta(0.0, 0.0, 0.0)
            self.belief = correct(self.belief, scan, self.field, self.grid)
        except ValueError as exc:
            warnings.append(f"localization failed: {exc}")
            self.belief = self._uniform_belief()
            self.last_predict_odom = self.odom_pose
            pending = OdometryDelta(0.0, 0.0, 0.0)
            self.state = ExhibitState.LOCALIZING
            self.path = None
        est = estimate(self.belief)
        # publish the argmax pose advanced by odometry the filter has not eaten
        pub = apply_odometry(est.pose, pending)
        timings["localize"] = (clock() - t0) * 1e3

        # plan: state progression plus A* when (re)planning
        t0 = clock()
        if self.state is ExhibitState.GOAL_RECEIVED:
            self.state = ExhibitState.LOCALIZING
        if self.state is ExhibitState.LOCALIZING:
            if self.goal is not None and is_converged(self.belief, cfg.confidence_threshold):
                self.state = ExhibitState.PLANNING
        if self.state is ExhibitState.PLANNING:
            if self.goal is None:
                self.state = ExhibitState.IDLE
            else:
                try:
                    raw = plan(self.inflated, (est.pose.x, est.pose.y), self.goal)
                    self.path = prune_path(raw, self.inflated)
                    self.navigating_since = self.sim_time
                    self.state = ExhibitState.NAVIGATING
                except ValueError as exc:
                    warnings.append(f"planning failed: {exc}")
                    self.goal = None
                    self.path = None
                    self.state = ExhibitState.IDLE
        if self.state is ExhibitState.NAVIGATING and self.goal is not None:
            if math.hypot(pub.x - self.goal[0], pub.y - self.goal[1]) <= cfg.goal_tolerance:
                self.state = ExhibitState.ARRIVED
                self.goal = None
                self.path = None
        timings["plan"] = (clock() - t0) * 1e3

        # act: DWA while navigating, otherwise hold still
        t0 = clock()
        trajectories: tuple[TrajectoryView, ...] = ()
        if self.state is ExhibitState.NAVIGATING and self.path is not None:
            target = next_waypoint(self.path, pub, cfg.lookahead)
            try:
                cmd, rollouts = select_command(
                    pub, self.cmd, target, self.grid, cfg.limits, cfg.dwa, self.distances
                )
                self.cmd = cmd
                trajectories = tuple(
                    TrajectoryView(
                        v=t.command.v,
                        omega=t.command.omega,
                        points=_decimate(t.poses),
                        admissible=t.admissible,
                        score=t.score,
                    )
                    for t in rollouts
                )
            except ValueError as exc:
                # estimate sits in a blocked cell: stop and replan next tick
                warnings.append(f"control failed: {exc}")
                self.cmd = VelocityCommand()
                self.state = ExhibitState.PLANNING
        else:
            self.cmd = VelocityCommand()
        timings["act"] = (clock() - t0) * 1e3

        self.tick += 1
        self.sim_time += dt

        marginal = self.belief.xy_marginal().T.copy()  # (ny, nx), row-major y rows
        endpoints = tuple(
            (
                pub.x + r * math.cos(pub.theta + cfg.scan.beam_offset(i)),
                pub.y + r * math.sin(pub.theta + cfg.scan.beam_offset(i)),
            )
            for i, r in enumerate(scan.ranges)
        )
        elapsed_nav = self.sim_time - self.navigating_since
        return Snapshot(
            tick=self.tick,
            sim_time=self.sim_time,
            true_pose=self.true_pose if self.debug_truth else None,
            estimate=pub,
            confidence=est.confidence,
            entropy=est.entropy,
            scan_endpoints=endpoints,
            marginal=marginal,
            belief_nx=self.belief.nx,
            belief_ny=self.belief.ny,
            belief_xy_resolution=self.belief.xy_resolution,
            belief_origin=self.belief.origin,
            path=self.path.waypoints if self.path is not None else (),
            trajectories=trajectories,
            selected=self.cmd,
            state=self.state,
            snippet=snippet_for(self.state, elapsed_nav),
            timings_ms=timings,
            warnings=tuple(warnings),
        )
