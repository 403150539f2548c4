"""Polygonal workspace with obstacles and the geometric queries the robots rely on.

The workspace stands in for the physical environment: point-membership tests,
distance-to-wall (clearance) queries, and ray casting that plays the role of an
idealized range sensor.  All lengths are metres, angles radians.  A workspace is
immutable after construction and safe to share across concurrent episode runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

Point = Tuple[float, float]

# On-edge decisions are resolved at this tolerance; doubles are exact well below it.
EPS_GEO = 1e-9


def polygon_area(vertices: Sequence[Point]) -> float:
    """Signed area (positive for counter-clockwise vertex order)."""
    total = 0.0
    n = len(vertices)
    for i in range(n):
        x1, y1 = vertices[i]
        x2, y2 = vertices[(i + 1) % n]
        total += x1 * y2 - x2 * y1
    return 0.5 * total


def ensure_ccw(vertices: Sequence[Point]) -> Tuple[Point, ...]:
    """Return the vertex list in counter-clockwise order (orientation normalized on load)."""
    pts = tuple((float(x), float(y)) for x, y in vertices)
    if polygon_area(pts) < 0.0:
        pts = pts[::-1]
    return pts


def point_in_polygon(p: Point, vertices: Sequence[Point]) -> bool:
    """Even-odd crossing test.  Points within EPS_GEO of an edge may land either way."""
    x, y = p
    inside = False
    n = len(vertices)
    x1, y1 = vertices[-1]
    for i in range(n):
        x2, y2 = vertices[i]
        if (y1 > y) != (y2 > y):
            x_cross = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if x < x_cross:
                inside = not inside
        x1, y1 = x2, y2
    return inside


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx = bx - ax
    dy = by - ay
    seg2 = dx * dx + dy * dy
    if seg2 <= 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / seg2
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool:
    """True if segment ab properly or improperly intersects segment cd."""

    def orient(p: Point, q: Point, r: Point) -> float:
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    def on_seg(p: Point, q: Point, r: Point) -> bool:
        return (
            min(p[0], r[0]) - EPS_GEO <= q[0] <= max(p[0], r[0]) + EPS_GEO
            and min(p[1], r[1]) - EPS_GEO <= q[1] <= max(p[1], r[1]) + EPS_GEO
        )

    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    if abs(o1) <= EPS_GEO and on_seg(a, c, b):
        return True
    if abs(o2) <= EPS_GEO and on_seg(a, d, b):
        return True
    if abs(o3) <= EPS_GEO and on_seg(c, a, d):
        return True
    if abs(o4) <= EPS_GEO and on_seg(c, b, d):
        return True
    return False


def _self_intersects(vertices: Sequence[Point]) -> bool:
    n = len(vertices)
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            # Adjacent edges share an endpoint; skip them.
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            if segments_intersect(edges[i][0], edges[i][1], edges[j][0], edges[j][1]):
                return True
    return False


@dataclass(frozen=True)
class Ray:
    """Sensor-geometry carrier: origin, direction angle and a positive max range."""

    origin: Point
    direction: float
    max_range: float

    def __post_init__(self) -> None:
        if not self.max_range > 0.0:
            raise ValueError(f"max_range must be > 0, got {self.max_range}")


class Workspace:
    """Simple-polygon boundary, polygonal obstacles, and a keep-out margin.

    The boundary must be non-self-intersecting and the obstacles must lie strictly
    inside it without overlapping each other.  The margin is not baked into the
    polygons; the map layer rejects lattice vertices that violate it.

    Near-edge queries within EDGE_INDEX_REACH use a lazily built per-cell edge
    index, so hot proximity tests touch only the handful of nearby edges.
    """

    EDGE_INDEX_REACH = 3.0
    _INDEX_CELL = 1.0

    def __init__(
        self,
        boundary: Sequence[Point],
        obstacles: Sequence[Sequence[Point]] = (),
        margin: float = 0.0,
    ) -> None:
        if len(boundary) < 3:
            raise ValueError("boundary needs at least 3 vertices")
        if margin < 0.0:
            raise ValueError("margin must be >= 0")
        self.boundary: Tuple[Point, ...] = ensure_ccw(boundary)
        self.obstacles: Tuple[Tuple[Point, ...], ...] = tuple(ensure_ccw(o) for o in obstacles)
        self.margin = float(margin)
        if _self_intersects(self.boundary):
            raise ValueError("boundary polygon is self-intersecting")
        for k, obs in enumerate(self.obstacles):
            if len(obs) < 3:
                raise ValueError(f"obstacle {k} needs at least 3 vertices")
            if _self_intersects(obs):
                raise ValueError(f"obstacle {k} is self-intersecting")
            for v in obs:
                if not point_in_polygon(v, self.boundary):
                    raise ValueError(f"obstacle {k} is not strictly inside the boundary")
        for i in range(len(self.obstacles)):
            for j in range(i + 1, len(self.obstacles)):
                if self._polygons_touch(self.obstacles[i], self.obstacles[j]):
                    raise ValueError(f"obstacles {i} and {j} overlap")
        self._edges: List[Tuple[float, float, float, float]] = []
        for poly in (self.boundary, *self.obstacles):
            n = len(poly)
            for i in range(n):
                x1, y1 = poly[i]
                x2, y2 = poly[(i + 1) % n]
                self._edges.append((x1, y1, x2, y2))
        self._edge_cells: dict = {}

    def edges_near(self, x: float, y: float) -> List[Tuple[float, float, float, float]]:
        """Edges within EDGE_INDEX_REACH of (x, y); memoized per index cell."""
        key = (math.floor(x / self._INDEX_CELL), math.floor(y / self._INDEX_CELL))
        cached = self._edge_cells.get(key)
        if cached is None:
            cx = (key[0] + 0.5) * self._INDEX_CELL
            cy = (key[1] + 0.5) * self._INDEX_CELL
            reach = self.EDGE_INDEX_REACH + 0.75 * self._INDEX_CELL
            cached = [
                e for e in self._edges
                if point_segment_distance((cx, cy), (e[0], e[1]), (e[2], e[3])) <= reach
            ]
            self._edge_cells[key] = cached
        return cached

    @staticmethod
    def _polygons_touch(a: Sequence[Point], b: Sequence[Point]) -> bool:
        if any(point_in_polygon(v, b) for v in a) or any(point_in_polygon(v, a) for v in b):
            return True
        na, nb = len(a), len(b)
        for i in range(na):
            for j in range(nb):
                if segments_intersect(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]):
                    return True
        return False

    @property
    def edges(self) -> List[Tuple[float, float, float, float]]:
        return self._edges

    def bounds(self) -> Tuple[float, float, float, float]:
        xs = [v[0] for v in self.boundary]
        ys = [v[1] for v in self.boundary]
        return min(xs), min(ys), max(xs), max(ys)


def contains_free(w: Workspace, p: Point) -> bool:
    """True iff p is inside the boundary and outside every obstacle."""
    if not point_in_polygon(p, w.boundary):
        return False
    for obs in w.obstacles:
        if point_in_polygon(p, obs):
            return False
    return True


def clearance(w: Workspace, p: Point) -> float:
    """Euclidean distance from a free-space point to the nearest wall or obstacle edge."""
    if not contains_free(w, p):
        raise ValueError(f"point {p} is not in free space")
    px, py = p
    best = math.inf
    for x1, y1, x2, y2 in w._edges:
        d = point_segment_distance((px, py), (x1, y1), (x2, y2))
        if d < best:
            best = d
    return best


def nearest_edge_point(w: Workspace, p: Point, within: float) -> Optional[Point]:
    """Closest point on any edge if it is nearer than `within`, else None."""
    px, py = p
    best = within
    hit: Optional[Point] = None
    edges = w.edges_near(px, py) if within <= Workspace.EDGE_INDEX_REACH else w._edges
    for x1, y1, x2, y2 in edges:
        dx = x2 - x1
        dy = y2 - y1
        seg2 = dx * dx + dy * dy
        if seg2 <= 0.0:
            t = 0.0
        else:
            t = ((px - x1) * dx + (py - y1) * dy) / seg2
            t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
        qx = x1 + t * dx
        qy = y1 + t * dy
        d = math.hypot(px - qx, py - qy)
        if d < best:
            best = d
            hit = (qx, qy)
    return hit


def raycast(w: Workspace, r: Ray) -> Optional[float]:
    """Distance to the first edge hit along the ray, or None when nothing is in range."""
    ox, oy = r.origin
    dx = math.cos(r.direction)
    dy = math.sin(r.direction)
    best: Optional[float] = None
    edges = (
        w.edges_near(ox, oy) if r.max_range <= Workspace.EDGE_INDEX_REACH else w._edges
    )
    for x1, y1, x2, y2 in edges:
        ex = x2 - x1
        ey = y2 - y1
        denom = dx * ey - dy * ex
        if abs(denom) < 1e-15:
            continue
        # Solve origin + t*d = (x1,y1) + s*e for t along the ray, s on the segment.
        t = ((x1 - ox) * ey - (y1 - oy) * ex) / denom
        if t <= EPS_GEO:
            continue
        s = ((x1 - ox) * dy - (y1 - oy) * dx) / denom
        if s < -EPS_GEO or s > 1.0 + EPS_GEO:
            continue
        if t <= r.max_range and (best is None or t < best):
            best = t
    return best


def segment_blocked(w: Workspace, a: Point, b: Point) -> bool:
    """True when the open segment from a to b crosses any wall or obstacle edge."""
    dist = math.hypot(b[0] - a[0], b[1] - a[1])
    if dist <= EPS_GEO:
        return False
    ang = math.atan2(b[1] - a[1], b[0] - a[0])
    hit = raycast(w, Ray(a, ang, dist))
    return hit is not None and hit < dist - EPS_GEO


@dataclass
class ClearanceGrid:
    """Coarse conservative lower bound on clearance, for cheap proximity gating.

    Each cell stores clearance at its centre minus the half-diagonal, so any point
    in the cell is at least that far from the nearest edge.  Outside the grid the
    bound is 0 (always fall back to the exact query).
    """

    workspace: Workspace
    cell: float = 0.5
    _x0: float = field(init=False)
    _y0: float = field(init=False)
    _nx: int = field(init=False)
    _ny: int = field(init=False)
    _values: List[float] = field(init=False)

    def __post_init__(self) -> None:
        x0, y0, x1, y1 = self.workspace.bounds()
        self._x0 = x0
        self._y0 = y0
        self._nx = max(1, int(math.ceil((x1 - x0) / self.cell)))
        self._ny = max(1, int(math.ceil((y1 - y0) / self.cell)))
        half_diag = 0.5 * math.sqrt(2.0) * self.cell
        vals = []
        w = self.workspace
        for iy in range(self._ny):
            cy = y0 + (iy + 0.5) * self.cell
            for ix in range(self._nx):
                cx = x0 + (ix + 0.5) * self.cell
                best = math.inf
                for ex1, ey1, ex2, ey2 in w._edges:
                    d = point_segment_distance((cx, cy), (ex1, ey1), (ex2, ey2))
                    if d < best:
                        best = d
                vals.append(max(0.0, best - half_diag))
        self._values = vals

    def lower_bound(self, x: float, y: float) -> float:
        ix = int((x - self._x0) / self.cell)
        iy = int((y - self._y0) / self.cell)
        if ix < 0 or iy < 0 or ix >= self._nx or iy >= self._ny:
            return 0.0
        return self._values[iy * self._nx + ix]


def free_space_connected(w: Workspace, resolution: float = 0.25) -> bool:
    """Flood-fill check over a fine grid that the free space is one connected region."""
    x0, y0, x1, y1 = w.bounds()
    nx = max(2, int((x1 - x0) / resolution))
    ny = max(2, int((y1 - y0) / resolution))
    cells = {}
    for iy in range(ny):
        for ix in range(nx):
            p = (x0 + (ix + 0.5) * resolution, y0 + (iy + 0.5) * resolution)
            if contains_free(w, p):
                cells[(ix, iy)] = False
    if not cells:
        return False
    stack = [next(iter(cells))]
    cells[stack[0]] = True
    seen = 1
    while stack:
        cx, cy = stack.pop()
        for nxt in ((cx + 1, cy), (cx - 1, cy), (cx, cy + 1), (cx, cy - 1)):
            if nxt in cells and not cells[nxt]:
                cells[nxt] = True
                seen += 1
                stack.append(nxt)
    return seen == len(cells)
