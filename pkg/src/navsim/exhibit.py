"""Exhibit state machine and the visitor info snippets.

The six texts are museum content fixtures: they must stay byte-identical to
fixtures/snippets.json, which the browser client embeds as well. Each state
shows exactly one snippet; while navigating, the planner text rotates with two
in-transit facts on a fixed timer.
"""

from __future__ import annotations

import enum


class ExhibitState(enum.Enum):
    IDLE = "Idle"
    GOAL_RECEIVED = "GoalReceived"
    LOCALIZING = "Localizing"
    PLANNING = "Planning"
    NAVIGATING = "Navigating"
    ARRIVED = "Arrived"


# Autonomous per-tick progression. External events are handled separately:
# set_goal moves any state to GoalReceived, reset moves any state to Idle.
STEP_TRANSITIONS = {
    ExhibitState.IDLE: (ExhibitState.IDLE, ExhibitState.GOAL_RECEIVED),
    ExhibitState.GOAL_RECEIVED: (ExhibitState.GOAL_RECEIVED, ExhibitState.LOCALIZING),
    ExhibitState.LOCALIZING: (ExhibitState.LOCALIZING, ExhibitState.PLANNING),
    ExhibitState.PLANNING: (
        ExhibitState.PLANNING,
        ExhibitState.NAVIGATING,
        ExhibitState.IDLE,
    ),
    ExhibitState.NAVIGATING: (
        ExhibitState.NAVIGATING,
        ExhibitState.ARRIVED,
        ExhibitState.PLANNING,
        ExhibitState.LOCALIZING,
    ),
    ExhibitState.ARRIVED: (ExhibitState.ARRIVED, ExhibitState.GOAL_RECEIVED),
}

SNIPPETS = {
    "a": (
        "In May 1997, the barrel-shaped robot guided museum visitors to selected "
        "exhibits and presented them. Now it has been virtually recreated."
    ),
    "b": (
        "You are now in a room with RHINO. Move the right controller in any "
        "direction and press the A button to give RHINO a destination"
    ),
    "c": (
        "To determine its position in space, the robot first scanned its "
        "surroundings with laser and sonar sensors. RHINO compared the result of "
        "the scan with a predefined map and estimated its probable position. "
        "After each movement, RHINO calculated new possible positions."
    ),
    "d": (
        "RHINO used a movement planning algorithm called A* to avoid obstacles. "
        "It calculated several paths based on its current position, speed and "
        "surroundings. It then chose the shortest path to reach a specific "
        "destination - without colliding with obstacles!"
    ),
    "e": (
        "To avoid people walking around the museum, RHINO constantly updated a "
        "map during its journey. An artificial neural network was used for this "
        "and trained in advance to predict whether there is an obstacle in its "
        "path."
    ),
    "f": (
        "RHINO was also equipped with infrared and touch sensors, as well as two "
        "cameras. The camera was also used at the time to allow people to view "
        "the exhibition and control RHINO remotely from home."
    ),
}

# Arrived reuses the destination prompt: the robot waits for the next goal.
STATE_SNIPPET = {
    ExhibitState.IDLE: "a",
    ExhibitState.GOAL_RECEIVED: "b",
    ExhibitState.LOCALIZING: "c",
    ExhibitState.PLANNING: "d",
    ExhibitState.ARRIVED: "b",
}

NAVIGATING_CYCLE = ("d", "e", "f")
NAVIGATING_PERIOD_S = 10.0


def snippet_for(state: ExhibitState, navigating_elapsed_s: float = 0.0) -> str:
    """Snippet id for a state; while navigating the id rotates every 10 s."""
    if state is ExhibitState.NAVIGATING:
        idx = int(navigating_elapsed_s / NAVIGATING_PERIOD_S) % len(NAVIGATING_CYCLE)
        return NAVIGATING_CYCLE[idx]
    return STATE_SNIPPET[state]
