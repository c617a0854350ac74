"""A* on the inflated occupancy grid, plus line-of-sight path pruning.

8-connected with octile heuristic by default; diagonal moves are refused when
either adjacent cardinal cell is blocked (no corner cutting). Equal-f ties pop
higher g first, then lower linear cell index, so plans are deterministic.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .world import CellState, GridMap, Pose, ray_cast

SQRT2 = math.sqrt(2.0)

# (dx, dy, unit cost); diagonals carry sqrt(2)
_CARDINAL = [(1, 0), (-1, 0), (0, 1), (0, -1)]
_DIAGONAL = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


@dataclass(frozen=True)
class Path:
    waypoints: tuple[tuple[float, float], ...]
    total_cost: float


def _octile(dx: int, dy: int) -> float:
    lo, hi = sorted((abs(dx), abs(dy)))
    return hi + (SQRT2 - 1.0) * lo


def _manhattan(dx: int, dy: int) -> float:
    return abs(dx) + abs(dy)


def plan(
    inflated: GridMap,
    start: tuple[float, float],
    goal: tuple[float, float],
    diagonals: bool = True,
) -> Path:
    """Minimum-cost cell path from the cell under start to the cell under goal,
    as world-point waypoints (cell centers)."""
    start_cell = inflated.world_to_grid(start[0], start[1])
    if start_cell is None or inflated.cells[start_cell[1], start_cell[0]] != CellState.FREE:
        raise ValueError("start blocked")
    goal_cell = inflated.world_to_grid(goal[0], goal[1])
    if goal_cell is None or inflated.cells[goal_cell[1], goal_cell[0]] != CellState.FREE:
        raise ValueError("goal blocked")

    res = inflated.resolution
    width = inflated.width
    cells = inflated.cells
    heuristic = _octile if diagonals else _manhattan

    def h(c):
        return heuristic(c[0] - goal_cell[0], c[1] - goal_cell[1]) * res

    g_score = {start_cell: 0.0}
    parent: dict[tuple[int, int], tuple[int, int]] = {}
    closed: set[tuple[int, int]] = set()
    # heap entries: (f, -g, linear index, cell)
    open_heap = [(h(start_cell), -0.0, start_cell[1] * width + start_cell[0], start_cell)]
    while open_heap:
        f, neg_g, _, cell = heapq.heappop(open_heap)
        if cell in closed:
            continue
        if cell == goal_cell:
            waypoints = [cell]
            while cell in parent:
                cell = parent[cell]
                waypoints.append(cell)
            waypoints.reverse()
            return Path(
                waypoints=tuple(inflated.grid_to_world(ix, iy) for ix, iy in waypoints),
                total_cost=-neg_g,
            )
        closed.add(cell)
        cx, cy = cell
        g = -neg_g

        def relax(nx, ny, step_cost):
            nb = (nx, ny)
            if nb in closed:
                return
            ng = g + step_cost
            if ng < g_score.get(nb, math.inf):
                g_score[nb] = ng
                parent[nb] = cell
                heapq.heappush(open_heap, (ng + h(nb), -ng, ny * width + nx, nb))

        for dx, dy in _CARDINAL:
            nx, ny = cx + dx, cy + dy
            if inflated.in_bounds(nx, ny) and cells[ny, nx] == CellState.FREE:
                relax(nx, ny, res)
        if diagonals:
            for dx, dy in _DIAGONAL:
                nx, ny = cx + dx, cy + dy
                if not (inflated.in_bounds(nx, ny) and cells[ny, nx] == CellState.FREE):
                    continue
                # no corner cutting: both touched cardinals must be free
                if cells[cy, nx] != CellState.FREE or cells[ny, cx] != CellState.FREE:
                    continue
                relax(nx, ny, SQRT2 * res)
    raise ValueError("unreachable")


def line_of_sight(grid: GridMap, a: tuple[float, float], b: tuple[float, float]) -> bool:
    """True when the segment from a to b crosses only free cells."""
    dist = math.hypot(b[0] - a[0], b[1] - a[1])
    if dist == 0.0:
        return True
    angle = math.atan2(b[1] - a[1], b[0] - a[0])
    # a hit exactly at dist is the target cell boundary, not an obstruction
    return ray_cast(grid, a[0], a[1], angle, dist) >= dist - 1e-12


def _polyline_cost(points) -> float:
    return sum(
        math.hypot(points[i + 1][0] - points[i][0], points[i + 1][1] - points[i][1])
        for i in range(len(points) - 1)
    )


def prune_path(path: Path, inflated: GridMap) -> Path:
    """Greedy shortcutting: jump to the farthest later waypoint still in line
    of sight. Endpoints are preserved and cost never grows."""
    pts = path.waypoints
    if len(pts) <= 2:
        return path
    kept = [pts[0]]
    i = 0
    while i < len(pts) - 1:
        j = len(pts) - 1
        while j > i + 1 and not line_of_sight(inflated, pts[i], pts[j]):
            j -= 1
        kept.append(pts[j])
        i = j
    return Path(waypoints=tuple(kept), total_cost=_polyline_cost(kept))


def next_waypoint(path: Path, pose: Pose, lookahead: float) -> tuple[float, float]:
    """Pursuit target: first waypoint strictly past the pose's projection onto
    the path that is farther than lookahead, else the final waypoint.

    Projecting onto the polyline (rather than snapping to the nearest vertex)
    is what keeps the target downstream: pruned paths have sparse corners, and
    a nearest-vertex rule would happily hand back a corner behind the robot.
    """
    pts = path.waypoints
    if len(pts) == 1:
        return pts[0]

    # arc-length parameter of the closest point on any segment
    best_d2 = math.inf
    proj_s = 0.0
    cum = 0.0
    cum_at = [0.0]
    for (ax, ay), (bx, by) in zip(pts, pts[1:]):
        vx, vy = bx - ax, by - ay
        seg_len2 = vx * vx + vy * vy
        if seg_len2 > 0.0:
            t = ((pose.x - ax) * vx + (pose.y - ay) * vy) / seg_len2
            t = min(1.0, max(0.0, t))
        else:
            t = 0.0
        px, py = ax + t * vx, ay + t * vy
        d2 = (pose.x - px) ** 2 + (pose.y - py) ** 2
        seg_len = math.sqrt(seg_len2)
        if d2 < best_d2:
            best_d2 = d2
            proj_s = cum + t * seg_len
        cum += seg_len
        cum_at.append(cum)

    for i in range(1, len(pts)):
        if cum_at[i] <= proj_s:
            continue
        if math.hypot(pts[i][0] - pose.x, pts[i][1] - pose.y) > lookahead:
            return pts[i]
    return pts[-1]
