#!/usr/bin/env python3
"""Profile the per-stage tick cost of a headless run.

Runs a config/scenario pair flat out and prints mean and p95 wall time per
pipeline stage, split by exhibit state, so the effect of knobs like
sensor.beam_stride or dwa.v_samples is visible in one table.

    python3 scripts/stage_timing.py configs/museum.cfg scenarios/museum_tour.scn 800
"""

import argparse
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from navsim.config import load_config, load_scenario
from navsim.exhibit import ExhibitState
from navsim.sim import STAGES, Simulator


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("config")
    ap.add_argument("scenario")
    ap.add_argument("ticks", type=int, nargs="?", default=400)
    args = ap.parse_args()

    cfg = load_config(args.config)
    scenario = load_scenario(args.scenario)
    sim = Simulator(cfg, start=scenario.start, debug_truth=True)
    goals = list(scenario.goals)

    by_state: dict[str, list[list[float]]] = defaultdict(list)
    for _ in range(args.ticks):
        if sim.goal is None and goals and sim.state in (ExhibitState.IDLE, ExhibitState.ARRIVED):
            ok, reason = sim.set_goal(*goals[0])
            if not ok:
                print(f"goal {goals[0]} rejected: {reason}", file=sys.stderr)
                return 2
            goals.pop(0)
        snap = sim.step()
        by_state[snap.state.value].append([snap.timings_ms[s] for s in STAGES])

    header = f"{'state':>12}  {'ticks':>5}" + "".join(
        f"  {s + ' mean':>13}  {s + ' p95':>12}" for s in STAGES
    )
    print(f"{Path(args.config).name} / {Path(args.scenario).name}, {args.ticks} ticks")
    print(header)
    total = []
    for state, rows in sorted(by_state.items()):
        arr = np.array(rows)
        total.extend(rows)
        line = f"{state:>12}  {len(rows):>5}"
        for i in range(len(STAGES)):
            line += f"  {arr[:, i].mean():>10.2f} ms  {np.percentile(arr[:, i], 95):>9.2f} ms"
        print(line)
    arr = np.array(total)
    print(f"{'all':>12}  {len(total):>5}" + "".join(
        f"  {arr[:, i].mean():>10.2f} ms  {np.percentile(arr[:, i], 95):>9.2f} ms"
        for i in range(len(STAGES))
    ))
    print(f"mean step: {arr.sum(axis=1).mean():.2f} ms  (budget 50 ms)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
