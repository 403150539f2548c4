"""Per-robot topological map over the shared lattice.

Vertices are keyed by integer lattice coordinates so merging is exact set algebra:
the join is visited-dominant and deletions are tombstoned (delete-wins) so a later
merge cannot resurrect a vertex that was purged as fake or unreachable.  A vertex
physically occupied by a robot is real by definition, so marking it visited clears
any tombstone.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Set, Tuple

from . import world
from .netsim import MapPacket
from .trigrid import Coord, GridFrame, nearest_vertex, six_neighbors, vertex_point

Point = Tuple[float, float]

STATE_DETECTED = "detected"
STATE_VISITED = "visited"


@dataclass(frozen=True)
class SensorModel:
    """Target-sensing radius, ray fan size and the raw range (sonar reach)."""

    r_s: float
    n_rays: int = 19
    max_range: float = 5.0

    def __post_init__(self) -> None:
        if not self.r_s > 0.0:
            raise ValueError(f"r_s must be > 0, got {self.r_s}")
        if self.n_rays < 1:
            raise ValueError("n_rays must be >= 1")
        if not self.max_range > 0.0:
            raise ValueError("max_range must be > 0")


class TopoMap:
    """Detected/visited lattice vertices of one robot, on a fixed shared frame."""

    __slots__ = ("frame", "entries", "unvisited", "tombstones", "_xy")

    def __init__(self, frame: GridFrame) -> None:
        self.frame = frame
        self.entries: Dict[Coord, bool] = {}
        self.unvisited: Set[Coord] = set()
        self.tombstones: Set[Coord] = set()
        self._xy: Dict[Coord, Point] = {}

    def __contains__(self, c: Coord) -> bool:
        return c in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def is_visited(self, c: Coord) -> bool:
        return self.entries.get(c, False)

    def vertex_xy(self, c: Coord) -> Point:
        p = self._xy.get(c)
        if p is None:
            p = vertex_point(self.frame, c)
            self._xy[c] = p
        return p

    def copy(self) -> "TopoMap":
        m = TopoMap(self.frame)
        m.entries = dict(self.entries)
        m.unvisited = set(self.unvisited)
        m.tombstones = set(self.tombstones)
        return m

    def _add_detected(self, c: Coord) -> bool:
        if c in self.entries or c in self.tombstones:
            return False
        self.entries[c] = False
        self.unvisited.add(c)
        return True


def detect_vertices(
    m: TopoMap,
    pose: Point,
    w: world.Workspace,
    sensor: SensorModel,
) -> List[Coord]:
    """Probe the six neighbours of the current vertex and add the admissible ones.

    A neighbour enters the map as detected-unvisited when the line of sight from the
    pose is unobstructed, the vertex lies in free space, and its clearance respects
    the workspace margin.  Already-known vertices are never downgraded.  Returns the
    newly added coordinates (the packet delta).
    """
    here = nearest_vertex(m.frame, pose)
    added: List[Coord] = []
    if m.frame.side > sensor.max_range:
        return added
    for c in six_neighbors(here):
        if c in m.entries or c in m.tombstones:
            continue
        v = m.vertex_xy(c)
        if not world.contains_free(w, v):
            continue
        if world.clearance(w, v) < w.margin:
            continue
        if world.segment_blocked(w, pose, v):
            continue
        m._add_detected(c)
        added.append(c)
    return added


def mark_visited(m: TopoMap, c: Coord) -> bool:
    """Set the vertex state to visited, inserting if absent; idempotent.

    Physical occupation overrides a tombstone: the robot is standing there.
    Returns True when the map changed.
    """
    if m.entries.get(c, None) is True:
        return False
    m.tombstones.discard(c)
    m.entries[c] = True
    m.unvisited.discard(c)
    return True


def delete_vertex(m: TopoMap, c: Coord) -> bool:
    """Purge an unvisited vertex and tombstone it (unreachable or fake).

    Visited vertices are proven real and are never deleted.
    """
    if m.entries.get(c, False):
        return False
    changed = c not in m.tombstones
    m.entries.pop(c, None)
    m.unvisited.discard(c)
    m.tombstones.add(c)
    return changed


def merge(mine: TopoMap, packet: MapPacket) -> TopoMap:
    """Fold a received map delta into this map (visited-dominant, delete-wins).

    Raises ValueError on a frame mismatch, which would signal a stage-one failure.
    """
    if packet.frame is not None and packet.frame != mine.frame:
        raise ValueError("map packet frame does not match receiver frame")
    for c in packet.deletions:
        delete_vertex(mine, c)
    for c, visited in packet.vertices:
        if visited:
            mark_visited(mine, c)
        else:
            mine._add_detected(c)
    return mine


def nearest_unvisited(m: TopoMap, p: Point) -> Optional[Coord]:
    """Closest detected-unvisited vertex to p; lexicographic (a, b) tie-break."""
    if not m.unvisited:
        return None
    px, py = p
    best: Optional[Coord] = None
    best_d = math.inf
    for c in m.unvisited:
        vx, vy = m.vertex_xy(c)
        d = math.hypot(vx - px, vy - py)
        if d < best_d - 1e-9:
            best_d = d
            best = c
        elif d <= best_d + 1e-9 and (best is None or c < best):
            best = c
            if d < best_d:
                best_d = d
    return best


def reset_visited(m: TopoMap) -> None:
    """Patrol support: flip every visited entry back to detected-unvisited."""
    for c in m.entries:
        m.entries[c] = False
    m.unvisited = set(m.entries)


def packet_for(m: TopoMap, sender: int, coords: Iterable[Coord],
               deletions: Iterable[Coord] = (), targets: Iterable[int] = ()) -> MapPacket:
    """Build the delta packet for coords currently present in the map."""
    vertices = tuple((c, m.entries[c]) for c in coords if c in m.entries)
    return MapPacket(
        sender=sender,
        vertices=vertices,
        detected_targets=tuple(targets),
        deletions=tuple(deletions),
        frame=m.frame,
    )


def full_packet(m: TopoMap, sender: int) -> MapPacket:
    """Entire map as one packet, used when a robot reconnects to the team."""
    vertices = tuple(sorted(m.entries.items()))
    return MapPacket(
        sender=sender,
        vertices=vertices,
        deletions=tuple(sorted(m.tombstones)),
        frame=m.frame,
    )


def to_csv_rows(m: TopoMap) -> List[Tuple[int, int, str]]:
    rows = []
    for (a, b), visited in sorted(m.entries.items()):
        rows.append((a, b, STATE_VISITED if visited else STATE_DETECTED))
    return rows


def dump_csv(m: TopoMap, path: str) -> None:
    """Post-run inspection dump: one `a,b,state` row per vertex."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["a", "b", "state"])
        writer.writerows(to_csv_rows(m))
