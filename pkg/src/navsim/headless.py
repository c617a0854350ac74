"""Headless runs: no clients, fixed tick count, metrics CSV out.

Scripted goals are fed one at a time: the next goal is submitted whenever the
robot is Idle or has Arrived. Exit code 0 means every scripted goal was
reached within the tick budget.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .config import Scenario, SimConfig
from .exhibit import ExhibitState
from .protocol import dumps, snapshot_message
from .sim import STAGES, Simulator
from .world import wrap_angle

CSV_HEADER = "tick,entropy,confidence,err_m,err_rad," + ",".join(
    f"t_{s}_ms" for s in STAGES
) + ",state"


@dataclass
class HeadlessResult:
    exit_code: int
    ticks_run: int
    arrived: int
    total_goals: int
    mean_step_ms: float
    messages: list[str] = field(default_factory=list)


def _csv_row(sim: Simulator, snap) -> str:
    err_m = math.hypot(snap.estimate.x - sim.true_pose.x, snap.estimate.y - sim.true_pose.y)
    err_rad = abs(wrap_angle(snap.estimate.theta - sim.true_pose.theta))
    cells = ",".join(f"{snap.timings_ms[s]:.6f}" for s in STAGES)
    return (
        f"{snap.tick},{snap.entropy:.9f},{snap.confidence:.9f},"
        f"{err_m:.9f},{err_rad:.9f},{cells},{snap.state.value}"
    )


def run_headless(
    cfg: SimConfig,
    scenario: Scenario,
    ticks: int,
    out_path: str | Path,
    snapshots_path: Optional[str | Path] = None,
    debug_truth: bool = False,
    timing: bool = True,
) -> HeadlessResult:
    sim = Simulator(cfg, start=scenario.start, debug_truth=debug_truth, timing=timing)
    goals = list(scenario.goals)
    next_goal = 0
    arrived = 0
    prev_state = sim.state
    rows = [CSV_HEADER]
    snapshot_lines: list[str] = []
    messages: list[str] = []
    aborted = False
    wall = 0.0

    for _ in range(ticks):
        if sim.goal is None and next_goal < len(goals) and sim.state in (
            ExhibitState.IDLE,
            ExhibitState.ARRIVED,
        ):
            ok, reason = sim.set_goal(*goals[next_goal])
            if not ok:
                messages.append(f"goal {next_goal} {goals[next_goal]} rejected: {reason}")
                aborted = True
                break
            next_goal += 1
        t0 = time.perf_counter()
        snap = sim.step()
        wall += time.perf_counter() - t0
        rows.append(_csv_row(sim, snap))
        if snapshots_path is not None:
            snapshot_lines.append(dumps(snapshot_message(snap)))
        if snap.state is ExhibitState.ARRIVED and prev_state is not ExhibitState.ARRIVED:
            arrived += 1
        for w in snap.warnings:
            messages.append(f"tick {snap.tick}: {w}")
        prev_state = snap.state

    Path(out_path).write_text("\n".join(rows) + "\n")
    if snapshots_path is not None:
        Path(snapshots_path).write_text(
            "".join(line + "\n" for line in snapshot_lines)
        )

    ticks_run = len(rows) - 1
    mean_ms = (wall / ticks_run * 1e3) if ticks_run else 0.0
    success = arrived == len(goals) and not aborted
    if aborted:
        code = 2
    elif success:
        code = 0
    else:
        code = 1
        messages.append(
            f"timeout: {arrived} of {len(goals)} goals arrived in {ticks_run} ticks"
        )
    return HeadlessResult(
        exit_code=code,
        ticks_run=ticks_run,
        arrived=arrived,
        total_goals=len(goals),
        mean_step_ms=mean_ms,
        messages=messages,
    )
