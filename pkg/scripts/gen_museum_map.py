#!/usr/bin/env python3
"""Generate the museum hall fixture map (16 m x 12 m at 0.2 m cells).

Deterministic layout: outer walls, a dividing wall with a doorway, exhibit
plinths, and a column. Regenerating overwrites maps/museum.map in place.
"""

from pathlib import Path

import numpy as np

from navsim.world import CellState, GridMap, dump_map

WIDTH, HEIGHT, RESOLUTION = 80, 60, 0.2


def build() -> GridMap:
    cells = np.full((HEIGHT, WIDTH), CellState.FREE, dtype=np.uint8)

    def wall(x0, x1, y0, y1):
        cells[y0 : y1 + 1, x0 : x1 + 1] = CellState.OCCUPIED

    # outer walls
    wall(0, WIDTH - 1, 0, 0)
    wall(0, WIDTH - 1, HEIGHT - 1, HEIGHT - 1)
    wall(0, 0, 0, HEIGHT - 1)
    wall(WIDTH - 1, WIDTH - 1, 0, HEIGHT - 1)

    # dividing wall across the hall with a doorway (x 34..44 stays open)
    wall(1, 33, 30, 31)
    wall(45, WIDTH - 2, 30, 31)

    # exhibit plinths
    wall(12, 20, 10, 16)   # south room, west plinth
    wall(34, 40, 8, 12)    # south room, center plinth
    wall(58, 66, 12, 18)   # south room, east plinth
    wall(14, 22, 40, 46)   # north room, west plinth
    wall(52, 62, 42, 48)   # north room, east plinth

    # column near the doorway
    wall(48, 50, 22, 24)

    return GridMap(
        width=WIDTH,
        height=HEIGHT,
        resolution=RESOLUTION,
        origin=(0.0, 0.0),
        cells=cells,
    )


def main() -> None:
    out = Path(__file__).resolve().parents[1] / "maps" / "museum.map"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dump_map(build()))
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
