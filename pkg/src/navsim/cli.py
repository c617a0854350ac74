"""Command line entry points: serve, run, plan, localize."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .config import SimConfig, load_config, load_scenario
from .control import KinematicLimits
from .headless import run_headless
from .localization import init_uniform
from .planning import plan as plan_path
from .planning import prune_path
from .world import GridMap, inflate_obstacles, load_map


def _parse_point(raw: str) -> tuple[float, float]:
    parts = raw.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected x,y — got {raw!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers — got {raw!r}") from None


def default_belief_dims(grid: GridMap, target_cell: float = 0.2) -> tuple[int, int]:
    """Refine toward ~0.2 m belief cells when the map resolution allows it."""
    k = grid.resolution / target_cell
    if k >= 1 and abs(k - round(k)) < 1e-9:
        k = int(round(k))
        return grid.width * k, grid.height * k
    return grid.width, grid.height


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve  # deferred: pulls in the web stack

    cfg = load_config(args.config)
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        print(f"bad bind address: {args.bind!r} (expected host:port)", file=sys.stderr)
        return 2
    serve(cfg, host, int(port), debug_truth=args.debug_truth)
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    scenario = load_scenario(args.scenario)
    result = run_headless(
        cfg,
        scenario,
        ticks=args.ticks,
        out_path=args.out,
        snapshots_path=args.snapshots,
        debug_truth=args.debug_truth,
        timing=not args.no_timing,
    )
    for line in result.messages:
        print(line)
    print(
        f"ticks: {result.ticks_run}  arrived: {result.arrived}/{result.total_goals}  "
        f"mean step ms: {result.mean_step_ms:.3f}"
    )
    return result.exit_code


def cmd_plan(args: argparse.Namespace) -> int:
    grid = load_map(Path(args.map).read_text())
    inflated = inflate_obstacles(grid, KinematicLimits().robot_radius)
    try:
        path = prune_path(plan_path(inflated, args.src, args.dst), inflated)
    except ValueError as exc:
        print(f"planning failed: {exc}", file=sys.stderr)
        return 1
    for x, y in path.waypoints:
        print(f"{x:.3f} {y:.3f}")
    print(f"cost: {path.total_cost:.3f}")
    return 0


def cmd_localize(args: argparse.Namespace) -> int:
    from .sim import Simulator

    grid = load_map(Path(args.map).read_text())
    nx, ny = default_belief_dims(grid)
    cfg = SimConfig(map_path=args.map, belief_nx=nx, belief_ny=ny)
    scenario = load_scenario(args.scenario)
    sim = Simulator(cfg, start=scenario.start, debug_truth=True)
    # deterministic sanity line: how many poses the prior spreads over
    belief = init_uniform(grid, nx, ny, cfg.belief_ntheta)
    live = int((belief.weights > 0).sum())
    print(f"uniform prior over {live} pose bins "
          f"({nx}x{ny}x{cfg.belief_ntheta}, cell {belief.xy_resolution:.3f} m)")
    for _ in range(args.ticks):
        snap = sim.step()
        err_m = math.hypot(snap.estimate.x - sim.true_pose.x, snap.estimate.y - sim.true_pose.y)
        print(
            f"tick {snap.tick:3d}  entropy {snap.entropy:10.6f}  "
            f"confidence {snap.confidence:8.6f}  err {err_m:.3f} m"
        )
    final = sim.true_pose
    est = snap.estimate
    print(f"true pose: ({final.x:.3f}, {final.y:.3f}, {final.theta:.3f})")
    print(f"estimate:  ({est.x:.3f}, {est.y:.3f}, {est.theta:.3f})")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="navsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the live session server")
    p.add_argument("--config", required=True)
    p.add_argument("--bind", default="127.0.0.1:8000")
    p.add_argument("--debug-truth", action="store_true")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("run", help="headless run writing a metrics CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--ticks", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--snapshots", help="also write the snapshot stream (JSONL)")
    p.add_argument("--debug-truth", action="store_true")
    p.add_argument(
        "--no-timing",
        action="store_true",
        help="zero the stage timings so outputs are byte-reproducible",
    )
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("plan", help="plan a path on a map and print waypoints")
    p.add_argument("--map", required=True)
    p.add_argument("--from", dest="src", type=_parse_point, required=True, metavar="X,Y")
    p.add_argument("--to", dest="dst", type=_parse_point, required=True, metavar="X,Y")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("localize", help="print a global localization trace")
    p.add_argument("--map", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--ticks", type=int, default=50)
    p.set_defaults(func=cmd_localize)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
