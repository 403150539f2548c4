"""Range-limited communication: per-step neighbour graph and in-component flooding.

Exchange is synchronous, lossless and instantaneous within a connected component;
multi-hop relay means every robot acts as a hub for its component.  Channel
imperfections are out of scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import FrozenSet, List, Optional, Sequence, Set, Tuple

from .trigrid import Coord, GridFrame

Point = Tuple[float, float]


@dataclass(frozen=True)
class CommGraph:
    n: int
    edges: FrozenSet[Tuple[int, int]]
    r_c: float


@dataclass(frozen=True)
class MapPacket:
    """Map delta a robot floods to its component: new/updated vertices and deletions."""

    sender: int
    vertices: Tuple[Tuple[Coord, bool], ...] = ()
    detected_targets: Tuple[int, ...] = ()
    deletions: Tuple[Coord, ...] = ()
    frame: Optional[GridFrame] = None


def build_graph(positions: Sequence[Point], r_c: float) -> CommGraph:
    """Undirected edges between every pair within r_c (inclusive)."""
    if not r_c > 0.0:
        raise ValueError(f"r_c must be > 0, got {r_c}")
    n = len(positions)
    r2 = r_c * r_c
    edges = set()
    for i in range(n):
        xi, yi = positions[i]
        for j in range(i + 1, n):
            dx = positions[j][0] - xi
            dy = positions[j][1] - yi
            if dx * dx + dy * dy <= r2:
                edges.add((i, j))
    return CommGraph(n, frozenset(edges), r_c)


def components(graph: CommGraph) -> List[Set[int]]:
    """Connected components in ascending order of their smallest member."""
    parent = list(range(graph.n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in graph.edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups: dict = {}
    for i in range(graph.n):
        groups.setdefault(find(i), set()).add(i)
    return [groups[k] for k in sorted(groups)]


def flood_exchange(
    graph: CommGraph, outboxes: Sequence[Sequence[MapPacket]]
) -> List[List[MapPacket]]:
    """Deliver every packet to all other members of the sender's component, once each.

    Inboxes are ordered by (sender id, position in the sender's outbox) so delivery is
    deterministic regardless of relay paths; duplicates over cycles cannot occur.
    """
    if len(outboxes) != graph.n:
        raise ValueError("one outbox per robot required")
    inboxes: List[List[MapPacket]] = [[] for _ in range(graph.n)]
    for comp in components(graph):
        members = sorted(comp)
        for sender in members:
            for pkt in outboxes[sender]:
                for member in members:
                    if member != sender:
                        inboxes[member].append(pkt)
    return inboxes


def joint_connectivity(windows: Sequence[CommGraph]) -> bool:
    """True iff the union of the window's graphs is a connected graph."""
    if not windows:
        raise ValueError("window must be non-empty")
    n = windows[0].n
    if any(g.n != n for g in windows):
        raise ValueError("all graphs in a window must share the robot count")
    if n <= 1:
        return True
    union = set()
    for g in windows:
        union |= g.edges
    merged = CommGraph(n, frozenset(union), windows[0].r_c)
    return len(components(merged)) == 1
