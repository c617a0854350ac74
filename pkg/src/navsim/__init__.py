"""Interactive 2D robot navigation simulator.

Grid localization, laser likelihood fields, A* planning, dynamic-window
control, and a live session server for browser clients.
"""

__version__ = "0.1.0"

from .world import CellState, GridMap, LaserScan, Pose, ScanConfig, load_map

__all__ = [
    "CellState",
    "GridMap",
    "LaserScan",
    "Pose",
    "ScanConfig",
    "load_map",
    "__version__",
]
