"""Simulation configuration: one flat key/value file, dotted keys for the
nested sections. Unknown keys are errors so typos cannot silently fall back
to defaults.

Example::

    map = maps/museum.map
    tick_rate = 10
    belief.ntheta = 36
    limits.v_max = 0.8
    # comments and blank lines are fine
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .control import DwaConfig, KinematicLimits
from .localization import MotionNoise
from .perception import SensorModelConfig
from .world import Pose, ScanConfig


@dataclass(frozen=True)
class SimConfig:
    map_path: str
    scan: ScanConfig = field(default_factory=ScanConfig)
    sensor: SensorModelConfig = field(default_factory=SensorModelConfig)
    motion_noise: MotionNoise = field(default_factory=MotionNoise)
    odom_noise: MotionNoise = field(default_factory=MotionNoise)
    limits: KinematicLimits = field(default_factory=KinematicLimits)
    dwa: DwaConfig = field(default_factory=DwaConfig)
    belief_nx: int = 0  # 0: one belief cell per map cell
    belief_ny: int = 0
    belief_ntheta: int = 36
    scan_noise_sigma: float = 0.0
    tick_rate: float = 10.0
    goal_tolerance: float = 0.3
    lookahead: float = 0.6  # pursuit distance for waypoint selection
    confidence_threshold: float = 0.2
    reset_belief_on_goal: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.tick_rate <= 0:
            raise ValueError("tick_rate must be positive")
        if self.goal_tolerance <= 0:
            raise ValueError("goal_tolerance must be positive")
        if self.scan_noise_sigma < 0:
            raise ValueError("scan_noise_sigma must be >= 0")
        if self.lookahead < 0:
            raise ValueError("lookahead must be >= 0")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate


# section prefix -> (dataclass, SimConfig field)
_SECTIONS = {
    "scan": (ScanConfig, "scan"),
    "sensor": (SensorModelConfig, "sensor"),
    "motion": (MotionNoise, "motion_noise"),
    "odom": (MotionNoise, "odom_noise"),
    "limits": (KinematicLimits, "limits"),
    "dwa": (DwaConfig, "dwa"),
}

_TOP_LEVEL = {
    "map": ("map_path", str),
    "belief.nx": ("belief_nx", int),
    "belief.ny": ("belief_ny", int),
    "belief.ntheta": ("belief_ntheta", int),
    "scan_noise_sigma": ("scan_noise_sigma", float),
    "tick_rate": ("tick_rate", float),
    "goal_tolerance": ("goal_tolerance", float),
    "lookahead": ("lookahead", float),
    "confidence_threshold": ("confidence_threshold", float),
    "reset_belief_on_goal": ("reset_belief_on_goal", bool),
    "seed": ("seed", int),
}


def _parse_value(raw: str, target: type):
    if target is bool:
        lowered = raw.lower()
        if lowered in ("true", "yes", "1"):
            return True
        if lowered in ("false", "no", "0"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return target(raw)


def parse_config(text: str, base_dir: Optional[Path] = None) -> SimConfig:
    """Parse config text; relative map paths resolve against base_dir."""
    top: dict = {}
    sections: dict = {name: {} for name in _SECTIONS}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"line {lineno}: expected key = value")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        try:
            if key in _TOP_LEVEL:
                name, target = _TOP_LEVEL[key]
                top[name] = _parse_value(raw, target)
                continue
            prefix, _, sub = key.partition(".")
            if prefix in _SECTIONS and sub:
                cls, _ = _SECTIONS[prefix]
                fields = {f.name: f.type for f in dataclasses.fields(cls)}
                if sub not in fields:
                    raise ValueError(f"unknown key: {key}")
                target = int if fields[sub] in ("int", int) else float
                sections[prefix][sub] = _parse_value(raw, target)
                continue
            raise ValueError(f"unknown key: {key}")
        except ValueError as exc:
            if str(exc).startswith(("unknown key", "not a boolean")):
                raise ValueError(f"line {lineno}: {exc}") from None
            raise ValueError(f"line {lineno}: bad value for {key}: {raw!r}") from None

    if "map_path" not in top:
        raise ValueError("config is missing required key: map")
    if base_dir is not None:
        top["map_path"] = str((base_dir / top["map_path"]).resolve())

    kwargs = dict(top)
    for prefix, (cls, attr) in _SECTIONS.items():
        if sections[prefix]:
            kwargs[attr] = cls(**sections[prefix])
    return SimConfig(**kwargs)


def load_config(path: str | Path) -> SimConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


@dataclass(frozen=True)
class Scenario:
    """Scripted run: a known start pose and an ordered list of goals."""

    start: Pose
    goals: tuple[tuple[float, float], ...] = ()


def parse_scenario(text: str) -> Scenario:
    start: Optional[Pose] = None
    goals: list[tuple[float, float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, _, rest = stripped.partition(":")
        parts = rest.split()
        try:
            if key.strip() == "start" and len(parts) == 3:
                start = Pose(float(parts[0]), float(parts[1]), float(parts[2]))
            elif key.strip() == "goal" and len(parts) == 2:
                goals.append((float(parts[0]), float(parts[1])))
            else:
                raise ValueError
        except ValueError:
            raise ValueError(
                f"line {lineno}: expected 'start: x y theta' or 'goal: x y'"
            ) from None
    if start is None:
        raise ValueError("scenario is missing a start pose")
    return Scenario(start=start, goals=tuple(goals))


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())
