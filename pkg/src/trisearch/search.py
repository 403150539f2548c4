"""Stage-two waypoint policies and mission bookkeeping.

Three policies pick the next vertex from the robot's own map: uniformly among the
detected six-neighbours (random), preferring unvisited six-neighbours (semi-random),
or heading straight for the nearest unvisited vertex anywhere in the map (modified).
A `None` choice means stay put: for coverage/target missions that is the stop state,
while the patrol variants keep moving forever.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .topomap import TopoMap, nearest_unvisited
from .trigrid import Coord, six_neighbors

Point = Tuple[float, float]

POLICY_RANDOM = "random"
POLICY_SEMIRANDOM = "semirandom"
POLICY_MODIFIED = "modified"
POLICIES = (POLICY_RANDOM, POLICY_SEMIRANDOM, POLICY_MODIFIED)


@dataclass(frozen=True)
class FullCoverage:
    """Visit every vertex of the covering grid at least once."""


@dataclass(frozen=True)
class Targets:
    positions: Tuple[Point, ...]

    def __post_init__(self) -> None:
        if not self.positions:
            raise ValueError("targets mission needs at least one target")


@dataclass(frozen=True)
class Patrol:
    """Never-ending sweep; reset_period (decision steps) only applies to modified."""

    reset_period: Optional[int] = None

    def __post_init__(self) -> None:
        if self.reset_period is not None and self.reset_period < 1:
            raise ValueError("reset_period must be >= 1 when given")


Mission = object  # FullCoverage | Targets | Patrol


class TargetLedger:
    """Monotone per-target detected flags."""

    __slots__ = ("flags",)

    def __init__(self, n_targets: int) -> None:
        self.flags: List[bool] = [False] * n_targets

    def mark(self, idx: int) -> bool:
        if self.flags[idx]:
            return False
        self.flags[idx] = True
        return True

    @property
    def all_detected(self) -> bool:
        return all(self.flags)

    @property
    def count(self) -> int:
        return sum(self.flags)


def _present_neighbors(m: TopoMap, current: Coord) -> List[Coord]:
    # Candidate set = the six-neighbourhood intersected with the robot's map,
    # in the fixed canonical offset order so seeded draws replay exactly.
    return [c for c in six_neighbors(current) if c in m.entries]


def next_waypoint_random(
    m: TopoMap, current: Coord, rng: np.random.Generator, patrol: bool = False
) -> Optional[Coord]:
    """Uniform draw over the detected six-neighbours; None when the mission is over."""
    if not patrol and not m.unvisited:
        return None
    candidates = _present_neighbors(m, current)
    if not candidates:
        return None
    return candidates[int(rng.integers(len(candidates)))]


def next_waypoint_semirandom(
    m: TopoMap, current: Coord, rng: np.random.Generator, patrol: bool = False
) -> Optional[Coord]:
    """Uniform over unvisited six-neighbours, falling back to all six-neighbours."""
    if not patrol and not m.unvisited:
        return None
    candidates = _present_neighbors(m, current)
    if not candidates:
        return None
    fresh = [c for c in candidates if not m.entries[c]]
    pool = fresh if fresh else candidates
    return pool[int(rng.integers(len(pool)))]


def next_waypoint_modified(m: TopoMap, pose: Point) -> Optional[Coord]:
    """Nearest unvisited vertex anywhere in the map (straight-line distance)."""
    return nearest_unvisited(m, pose)


def sense_targets(
    ledger: TargetLedger,
    target_positions: Sequence[Point],
    robot_positions: Sequence[Point],
    r_s: float,
) -> List[int]:
    """Flag every undetected target within sensing range of any robot."""
    newly = []
    r2 = r_s * r_s
    for idx, (tx, ty) in enumerate(target_positions):
        if ledger.flags[idx]:
            continue
        for rx, ry in robot_positions:
            dx = rx - tx
            dy = ry - ty
            if dx * dx + dy * dy <= r2:
                ledger.mark(idx)
                newly.append(idx)
                break
    return newly


def mission_step(
    mission: Mission,
    ledger: Optional[TargetLedger],
    maps: Sequence[TopoMap],
    robot_positions: Sequence[Point],
    r_s: float,
) -> bool:
    """Update target flags from current sensing and report mission completion."""
    if isinstance(mission, Targets):
        assert ledger is not None
        sense_targets(ledger, mission.positions, robot_positions, r_s)
        return ledger.all_detected
    if isinstance(mission, FullCoverage):
        return all(not m.unvisited for m in maps)
    if isinstance(mission, Patrol):
        return False
    raise TypeError(f"unknown mission type {type(mission)!r}")
