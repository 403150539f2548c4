"""Independent brute-force oracles used to compute expected test values.

Everything here deliberately avoids the library's own algorithms: winding-number
membership instead of crossing counts, exhaustive lattice enumeration instead of
basis inversion, BFS delivery instead of component flooding, and dense
fundamental-matrix solves for absorbing chains.
"""

from __future__ import annotations

import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

Point = Tuple[float, float]


def winding_number_inside(p: Point, poly: Sequence[Point]) -> bool:
    """Point-in-polygon by accumulated subtended angle."""
    total = 0.0
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i][0] - p[0], poly[i][1] - p[1]
        bx, by = poly[(i + 1) % n][0] - p[0], poly[(i + 1) % n][1] - p[1]
        total += math.atan2(ax * by - ay * bx, ax * bx + ay * by)
    return abs(total) > math.pi


def sampled_min_edge_distance(p: Point, polys: Sequence[Sequence[Point]], samples: int = 2000) -> float:
    """Minimum distance to any polygon outline via dense per-edge sampling."""
    best = math.inf
    for poly in polys:
        n = len(poly)
        for i in range(n):
            ax, ay = poly[i]
            bx, by = poly[(i + 1) % n]
            for k in range(samples + 1):
                t = k / samples
                d = math.hypot(p[0] - (ax + t * (bx - ax)), p[1] - (ay + t * (by - ay)))
                if d < best:
                    best = d
    return best


def exact_min_edge_distance(p: Point, polys: Sequence[Sequence[Point]]) -> float:
    """Minimum distance to any polygon outline via orthogonal projection."""
    best = math.inf
    for poly in polys:
        n = len(poly)
        for i in range(n):
            ax, ay = poly[i]
            bx, by = poly[(i + 1) % n]
            ex, ey = bx - ax, by - ay
            seg2 = ex * ex + ey * ey
            t = 0.0 if seg2 == 0.0 else ((p[0] - ax) * ex + (p[1] - ay) * ey) / seg2
            t = min(1.0, max(0.0, t))
            d = math.hypot(p[0] - (ax + t * ex), p[1] - (ay + t * ey))
            if d < best:
                best = d
    return best


def segment_ray_hit(origin: Point, angle: float, a: Point, b: Point) -> Optional[float]:
    """Parametric ray/segment intersection distance, or None."""
    dx, dy = math.cos(angle), math.sin(angle)
    ex, ey = b[0] - a[0], b[1] - a[1]
    denom = dx * ey - dy * ex
    if abs(denom) < 1e-15:
        return None
    t = ((a[0] - origin[0]) * ey - (a[1] - origin[1]) * ex) / denom
    s = ((a[0] - origin[0]) * dy - (a[1] - origin[1]) * dx) / denom
    if t > 1e-9 and -1e-9 <= s <= 1.0 + 1e-9:
        return t
    return None


def brute_force_nearest(q: Point, theta: float, side: float, p: Point, radius: int = 60) -> Tuple[int, int]:
    """Exhaustive nearest lattice vertex over a generous coordinate window."""
    ux, uy = side * math.cos(theta), side * math.sin(theta)
    wx = side * math.cos(theta + math.pi / 3.0)
    wy = side * math.sin(theta + math.pi / 3.0)
    best = None
    best_d = math.inf
    for a in range(-radius, radius + 1):
        for b in range(-radius, radius + 1):
            vx = q[0] + a * ux + b * wx
            vy = q[1] + a * uy + b * wy
            d = math.hypot(p[0] - vx, p[1] - vy)
            if d < best_d - 1e-9 or (d <= best_d + 1e-9 and (best is None or (a, b) < best)):
                if d < best_d:
                    best_d = d
                best = (a, b)
    assert best is not None
    return best


def bfs_delivery(n: int, edges: Iterable[Tuple[int, int]], sender: int) -> set:
    """Set of robots reachable from the sender by multi-hop relay."""
    adj: Dict[int, List[int]] = {i: [] for i in range(n)}
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {sender}
    queue = [sender]
    while queue:
        cur = queue.pop(0)
        for nxt in adj[cur]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    seen.discard(sender)
    return seen


def expected_absorption_steps(
    states: Sequence[object],
    transitions: Dict[object, Dict[object, float]],
    start: object,
    absorbing: Iterable[object],
) -> float:
    """Expected steps to absorption from `start` via the fundamental matrix."""
    absorbing = set(absorbing)
    transient = [s for s in states if s not in absorbing]
    index = {s: i for i, s in enumerate(transient)}
    m = len(transient)
    q = np.zeros((m, m))
    for s in transient:
        for nxt, prob in transitions[s].items():
            if nxt not in absorbing:
                q[index[s], index[nxt]] = prob
    # N = (I - Q)^-1; expected steps = row sums of N.
    t = np.linalg.solve(np.eye(m) - q, np.ones(m))
    return float(t[index[start]])


def hex7_neighbors() -> Dict[int, List[int]]:
    """Adjacency of the 7-vertex lattice patch: centre 0 plus a six-ring.

    Ring vertices neighbour the centre and their two ring neighbours; every other
    six-neighbour falls outside the patch.
    """
    adj = {0: [1, 2, 3, 4, 5, 6]}
    for k in range(1, 7):
        left = 1 + (k - 2) % 6
        right = 1 + k % 6
        adj[k] = [0, left, right]
    return adj


def hex7_cover_time_exact(start: int = 0) -> float:
    """Exact mean cover time of a uniform walk on the 7-vertex patch."""
    adj = hex7_neighbors()
    states = []
    transitions: Dict[object, Dict[object, float]] = {}
    full = (1 << 7) - 1
    for pos in range(7):
        for mask in range(1 << 7):
            if not mask & (1 << pos):
                continue
            state = (pos, mask)
            states.append(state)
            if mask == full:
                continue
            nbrs = adj[pos]
            prob = 1.0 / len(nbrs)
            dist: Dict[object, float] = {}
            for nxt in nbrs:
                tgt = (nxt, mask | (1 << nxt))
                dist[tgt] = dist.get(tgt, 0.0) + prob
            transitions[state] = dist
    absorbing = [(pos, full) for pos in range(7)]
    start_state = (start, 1 << start)
    return expected_absorption_steps(states, transitions, start_state, absorbing)
