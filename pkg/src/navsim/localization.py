"""Global Markov localization: discrete Bayes filter over an (x, y, theta) grid.

Prediction pushes mass through the odometric motion model with a truncated
Gaussian kernel; correction multiplies by likelihood-field scan scores. Both
return new grids; weights always sum to 1 and live only in free space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .perception import LikelihoodField
from .world import CellState, GridMap, LaserScan, Pose, wrap_angle

# Below this translation the rot1/trans bearing is numerically meaningless and
# the whole rotation is attributed to rot2.
DEGENERATE_TRANS = 0.01


@dataclass(frozen=True)
class OdometryDelta:
    delta_rot1: float
    delta_trans: float
    delta_rot2: float

    def __post_init__(self) -> None:
        if self.delta_trans < 0:
            raise ValueError("delta_trans must be >= 0")


@dataclass(frozen=True)
class MotionNoise:
    alpha1: float = 0.1
    alpha2: float = 0.05
    alpha3: float = 0.1
    alpha4: float = 0.05

    def __post_init__(self) -> None:
        if min(self.alpha1, self.alpha2, self.alpha3, self.alpha4) < 0:
            raise ValueError("alphas must be >= 0")


@dataclass(frozen=True)
class PoseEstimate:
    pose: Pose
    confidence: float
    entropy: float


@dataclass(frozen=True)
class BeliefGrid:
    """Weights indexed [ix, iy, itheta], C-order linear indexing for ties.

    Spatial cell (i, j) is centered at origin + ((i+0.5), (j+0.5))*xy_resolution;
    theta bin b is centered at -pi + b*theta_resolution so cardinal headings are
    exact bin centers.
    """

    nx: int
    ny: int
    ntheta: int
    xy_resolution: float
    origin: tuple[float, float]
    weights: np.ndarray  # (nx, ny, ntheta) float64
    free_mask: np.ndarray  # (nx, ny) bool

    @property
    def theta_resolution(self) -> float:
        return 2.0 * math.pi / self.ntheta

    def cell_center(self, ix: int, iy: int, itheta: int) -> Pose:
        return Pose(
            self.origin[0] + (ix + 0.5) * self.xy_resolution,
            self.origin[1] + (iy + 0.5) * self.xy_resolution,
            -math.pi + itheta * self.theta_resolution,
        )

    def theta_bin(self, theta: float) -> int:
        """Bin whose center is nearest to theta (bins wrap at +-pi)."""
        return int(math.floor((wrap_angle(theta) + math.pi) / self.theta_resolution + 0.5)) % self.ntheta

    def xy_marginal(self) -> np.ndarray:
        """(nx, ny) position marginal, the UI heatmap payload."""
        return self.weights.sum(axis=2)

    def entropy(self) -> float:
        live = self.weights[self.weights > 0]
        return float(-(live * np.log(live)).sum())


def belief_cell_size(grid: GridMap, nx: int, ny: int) -> float:
    """Belief cell edge length for an (nx, ny) grid over this map. The belief
    may coarsen or refine the map by an integer factor, same on both axes."""
    if grid.width % nx == 0 and grid.height % ny == 0:
        factor_x = grid.width // nx
        factor_y = grid.height // ny
        if factor_x != factor_y:
            raise ValueError("belief cells must be square (same factor per axis)")
        return factor_x * grid.resolution
    if nx % grid.width == 0 and ny % grid.height == 0:
        factor_x = nx // grid.width
        factor_y = ny // grid.height
        if factor_x != factor_y:
            raise ValueError("belief cells must be square (same factor per axis)")
        return grid.resolution / factor_x
    raise ValueError("belief grid must evenly divide the map")


def init_uniform(grid: GridMap, nx: int, ny: int, ntheta: int) -> BeliefGrid:
    """Uniform belief over free space; see belief_cell_size for the allowed
    shapes."""
    if nx < 1 or ny < 1 or ntheta < 1:
        raise ValueError("belief dimensions must be positive")
    xy_res = belief_cell_size(grid, nx, ny)

    free = np.zeros((nx, ny), dtype=bool)
    for ix in range(nx):
        for iy in range(ny):
            cx = grid.origin[0] + (ix + 0.5) * xy_res
            cy = grid.origin[1] + (iy + 0.5) * xy_res
            ij = grid.world_to_grid(cx, cy)
            free[ix, iy] = ij is not None and grid.cells[ij[1], ij[0]] == CellState.FREE
    count = int(free.sum())
    if count == 0:
        raise ValueError("no free cells")

    weights = np.zeros((nx, ny, ntheta))
    weights[free, :] = 1.0 / (count * ntheta)
    return BeliefGrid(
        nx=nx,
        ny=ny,
        ntheta=ntheta,
        xy_resolution=xy_res,
        origin=grid.origin,
        weights=weights,
        free_mask=free,
    )


def decompose_odometry(prev: Pose, curr: Pose) -> OdometryDelta:
    dx = curr.x - prev.x
    dy = curr.y - prev.y
    trans = math.hypot(dx, dy)
    if trans < DEGENERATE_TRANS:
        rot1 = 0.0
    else:
        rot1 = wrap_angle(math.atan2(dy, dx) - prev.theta)
    rot2 = wrap_angle(curr.theta - prev.theta - rot1)
    return OdometryDelta(delta_rot1=rot1, delta_trans=trans, delta_rot2=rot2)


def apply_odometry(pose: Pose, delta: OdometryDelta) -> Pose:
    heading = pose.theta + delta.delta_rot1
    return Pose(
        pose.x + delta.delta_trans * math.cos(heading),
        pose.y + delta.delta_trans * math.sin(heading),
        pose.theta + delta.delta_rot1 + delta.delta_rot2,
    )


def motion_stds(delta: OdometryDelta, noise: MotionNoise) -> tuple[float, float, float]:
    r1 = abs(delta.delta_rot1)
    r2 = abs(delta.delta_rot2)
    t = delta.delta_trans
    return (
        noise.alpha1 * r1 + noise.alpha2 * t,
        noise.alpha3 * t + noise.alpha4 * (r1 + r2),
        noise.alpha1 * r2 + noise.alpha2 * t,
    )


def _axis_kernel(sigma: float, step: float) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian sampled at multiples of step, truncated at 3 sigma, normalized."""
    if sigma <= 0.0:
        return np.zeros(1), np.ones(1)
    kmax = int(math.floor(3.0 * sigma / step))
    offsets = np.arange(-kmax, kmax + 1) * step
    weights = np.exp(-0.5 * (offsets / sigma) ** 2)
    return offsets, weights / weights.sum()


def predict(belief: BeliefGrid, delta: OdometryDelta, noise: MotionNoise) -> BeliefGrid:
    """Motion update. Mass moves by the mean (rot1, trans, rot2) and spreads
    over the noise kernel; anything landing off-map or on a blocked cell is
    dropped before renormalizing."""
    sig_rot1, sig_trans, sig_rot2 = motion_stds(delta, noise)
    r1_offs, r1_wts = _axis_kernel(sig_rot1, belief.theta_resolution)
    t_offs, t_wts = _axis_kernel(sig_trans, belief.xy_resolution)
    r2_offs, r2_wts = _axis_kernel(sig_rot2, belief.theta_resolution)

    w = belief.weights
    out = np.zeros_like(w)
    res = belief.xy_resolution
    for b in range(belief.ntheta):
        src = w[:, :, b]
        if not src.any():
            continue
        theta_b = -math.pi + b * belief.theta_resolution
        for r1o, kw1 in zip(r1_offs, r1_wts):
            heading = theta_b + delta.delta_rot1 + r1o
            cos_h = math.cos(heading)
            sin_h = math.sin(heading)
            for to, kwt in zip(t_offs, t_wts):
                dist = delta.delta_trans + to
                shift_x = math.floor(0.5 + dist * cos_h / res)
                shift_y = math.floor(0.5 + dist * sin_h / res)
                if abs(shift_x) >= belief.nx or abs(shift_y) >= belief.ny:
                    continue  # every target is off-grid
                sx = int(shift_x)
                sy = int(shift_y)
                xs_dst = slice(max(sx, 0), belief.nx + min(sx, 0))
                xs_src = slice(max(-sx, 0), belief.nx + min(-sx, 0))
                ys_dst = slice(max(sy, 0), belief.ny + min(sy, 0))
                ys_src = slice(max(-sy, 0), belief.ny + min(-sy, 0))
                moved = src[xs_src, ys_src]
                for r2o, kw2 in zip(r2_offs, r2_wts):
                    tb = belief.theta_bin(heading + delta.delta_rot2 + r2o)
                    out[xs_dst, ys_dst, tb] += (kw1 * kwt * kw2) * moved

    out *= belief.free_mask[:, :, None]
    total = out.sum()
    if total <= 0.0:
        raise ValueError("belief annihilated")
    out /= total
    return BeliefGrid(
        nx=belief.nx,
        ny=belief.ny,
        ntheta=belief.ntheta,
        xy_resolution=belief.xy_resolution,
        origin=belief.origin,
        weights=out,
        free_mask=belief.free_mask,
    )


def scan_log_likelihood_grid(
    belief: BeliefGrid, scan: LaserScan, field: LikelihoodField
) -> np.ndarray:
    """Per-cell scan log-likelihood, (nx, ny, ntheta).

    Mirrors the scalar scorer exactly: same table lookups, same per-beam
    accumulation order, so each entry is bit-identical to scan_log_likelihood
    at that cell's center pose.
    """
    from .perception import EDGE_NUDGE

    cfg = scan.config
    ln_q, ln_q_outside, ln_q_max = field.log_tables(cfg.max_range)
    padded = np.full((field.height + 2, field.width + 2), ln_q_outside)
    padded[1:-1, 1:-1] = ln_q

    ox, oy = field.origin
    mres = field.resolution
    cx = belief.origin[0] + (np.arange(belief.nx) + 0.5) * belief.xy_resolution
    cy = belief.origin[1] + (np.arange(belief.ny) + 0.5) * belief.xy_resolution
    cx2 = cx[:, None]
    cy2 = cy[:, None]

    stride = field.config.beam_stride
    # wrapped exactly like Pose does, so entries match the scalar scorer
    thetas = [wrap_angle(-math.pi + b * belief.theta_resolution) for b in range(belief.ntheta)]
    # one fused gather per beam over all (x, y, theta) bins; per-element
    # arithmetic and accumulation order stay identical to the scalar scorer
    acc = np.zeros((belief.nx, belief.ny, belief.ntheta))
    for i in range(0, cfg.beam_count, stride):
        r = scan.ranges[i]
        if r >= cfg.max_range:
            acc += ln_q_max
            continue
        offset = cfg.beam_offset(i)
        cos_a = np.array([math.cos(t + offset) for t in thetas])
        sin_a = np.array([math.sin(t + offset) for t in thetas])
        ex = cx2 + (r * cos_a)[None, :]  # (nx, ntheta)
        ey = cy2 + (r * sin_a)[None, :]  # (ny, ntheta)
        ix = np.floor((ex - ox) / mres + EDGE_NUDGE * cos_a[None, :]).astype(np.int64)
        iy = np.floor((ey - oy) / mres + EDGE_NUDGE * sin_a[None, :]).astype(np.int64)
        np.clip(ix, -1, field.width, out=ix)
        np.clip(iy, -1, field.height, out=iy)
        acc += padded[(iy + 1)[None, :, :], (ix + 1)[:, None, :]]
    return acc


def correct(
    belief: BeliefGrid, scan: LaserScan, field: LikelihoodField, grid: GridMap
) -> BeliefGrid:
    """Measurement update: multiply by exp(log-likelihood - max over live cells),
    then renormalize."""
    w = belief.weights
    live = w > 0
    if not live.any():
        raise ValueError("measurement annihilated belief")
    log_lik = scan_log_likelihood_grid(belief, scan, field)
    max_log = log_lik[live].max()
    out = w * np.exp(np.minimum(log_lik - max_log, 0.0))
    total = out.sum()
    if total <= 0.0:
        raise ValueError("measurement annihilated belief")
    out /= total
    return BeliefGrid(
        nx=belief.nx,
        ny=belief.ny,
        ntheta=belief.ntheta,
        xy_resolution=belief.xy_resolution,
        origin=belief.origin,
        weights=out,
        free_mask=belief.free_mask,
    )


def estimate(belief: BeliefGrid) -> PoseEstimate:
    flat = np.argmax(belief.weights)  # first occurrence = lowest linear index
    ix, iy, it = np.unravel_index(flat, belief.weights.shape)
    return PoseEstimate(
        pose=belief.cell_center(int(ix), int(iy), int(it)),
        confidence=float(belief.weights[ix, iy, it]),
        entropy=belief.entropy(),
    )


def is_converged(belief: BeliefGrid, confidence_threshold: float) -> bool:
    return float(belief.weights.max()) >= confidence_threshold
