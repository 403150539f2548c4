"""Stage-one locating: neighbour averaging of the per-robot grid variables.

Each robot carries an orientation variable and an anchor-point variable; both are
replaced every step by the plain average over itself and its current neighbours,
and the robot then moves to the nearest vertex of the grid those variables define.
Orientation values start in [0, pi) so the averaging needs no angular wrap-around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .trigrid import GridFrame, nearest_vertex, vertex_point

Point = Tuple[float, float]

# Defaults sit three-plus orders of magnitude below any sensible lattice side.
TOL_THETA = 1e-4
TOL_Q = 1e-3


@dataclass(frozen=True)
class LocatingState:
    theta: float
    q: Point

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta < math.pi:
            raise ValueError(f"theta must lie in [0, pi), got {self.theta}")


def locating_update(state: LocatingState, neighbors: Sequence[LocatingState]) -> LocatingState:
    """Average self and neighbours; an empty neighbour list leaves the state unchanged."""
    n = 1 + len(neighbors)
    theta = state.theta
    qx, qy = state.q
    for nb in neighbors:
        theta += nb.theta
        qx += nb.q[0]
        qy += nb.q[1]
    return LocatingState(theta / n, (qx / n, qy / n))


def snap_waypoint(state: LocatingState, side: float, p: Point) -> Point:
    """Nearest vertex of the robot's own current grid; its stage-one waypoint."""
    if not side > 0.0:
        raise ValueError(f"side must be > 0, got {side}")
    frame = GridFrame(state.q, state.theta, side)
    return vertex_point(frame, nearest_vertex(frame, p))


def consensus_converged(
    states: Sequence[LocatingState],
    tol_theta: float = TOL_THETA,
    tol_q: float = TOL_Q,
) -> bool:
    """True iff max pairwise orientation gap and anchor distance are within tolerance."""
    if not (tol_theta > 0.0 and tol_q > 0.0):
        raise ValueError("tolerances must be > 0")
    thetas = [s.theta for s in states]
    if max(thetas) - min(thetas) > tol_theta:
        return False
    for i in range(len(states)):
        xi, yi = states[i].q
        for j in range(i + 1, len(states)):
            xj, yj = states[j].q
            if math.hypot(xi - xj, yi - yj) > tol_q:
                return False
    return True


def spread(states: Sequence[LocatingState]) -> Tuple[float, float]:
    """(theta spread, max pairwise anchor distance) — the quantities that must decay."""
    thetas = [s.theta for s in states]
    dq = 0.0
    for i in range(len(states)):
        xi, yi = states[i].q
        for j in range(i + 1, len(states)):
            xj, yj = states[j].q
            dq = max(dq, math.hypot(xi - xj, yi - yj))
    return max(thetas) - min(thetas), dq
