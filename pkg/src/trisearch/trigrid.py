"""Equilateral triangular lattice math.

A frame is fixed by one anchor vertex q and one orientation theta; vertices are
addressed by integer axial coordinates (a, b) with world position
q + a*u + b*w, where u = side*(cos t, sin t) and w = side*(cos(t+60deg), sin(t+60deg)).
The integer keys make maps merge exactly; all geometry stays in the frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

Coord = Tuple[int, int]
Point = Tuple[float, float]

# Fixed canonical order; every offset is at distance `side` from the centre vertex.
NEIGHBOR_OFFSETS: Tuple[Coord, ...] = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))

_COS60 = 0.5
_SIN60 = math.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class GridFrame:
    q: Point
    theta: float
    side: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta < math.pi:
            raise ValueError(f"theta must lie in [0, pi), got {self.theta}")
        if not self.side > 0.0:
            raise ValueError(f"side must be > 0, got {self.side}")

    def basis(self) -> Tuple[float, float, float, float]:
        """(ux, uy, wx, wy) of the two lattice basis vectors."""
        c = math.cos(self.theta)
        s = math.sin(self.theta)
        ux = self.side * c
        uy = self.side * s
        wx = self.side * (c * _COS60 - s * _SIN60)
        wy = self.side * (s * _COS60 + c * _SIN60)
        return ux, uy, wx, wy


def vertex_point(f: GridFrame, c: Coord) -> Point:
    """World position of lattice vertex c."""
    ux, uy, wx, wy = f.basis()
    a, b = c
    return (f.q[0] + a * ux + b * wx, f.q[1] + a * uy + b * wy)


def nearest_vertex(f: GridFrame, p: Point) -> Coord:
    """Closest lattice vertex to p; ties broken by smallest (a, b) lexicographically.

    The lattice basis is inverted to find the fractional cell, then the 3x3 block of
    integer candidates around it is checked, which always contains the minimiser.
    """
    ux, uy, wx, wy = f.basis()
    rx = p[0] - f.q[0]
    ry = p[1] - f.q[1]
    det = ux * wy - uy * wx
    af = (rx * wy - ry * wx) / det
    bf = (ux * ry - uy * rx) / det
    a0 = math.floor(af)
    b0 = math.floor(bf)
    best_d = math.inf
    best: Coord = (a0, b0)
    for a in (a0 - 1, a0, a0 + 1, a0 + 2):
        for b in (b0 - 1, b0, b0 + 1, b0 + 2):
            dx = rx - (a * ux + b * wx)
            dy = ry - (a * uy + b * wy)
            d = math.hypot(dx, dy)
            if d < best_d - 1e-9:
                best_d = d
                best = (a, b)
            elif d <= best_d + 1e-9 and (a, b) < best:
                best = (a, b)
                if d < best_d:
                    best_d = d
    return best


def six_neighbors(c: Coord) -> List[Coord]:
    """The six lattice vertices at distance exactly one side from c."""
    a, b = c
    return [(a + da, b + db) for da, db in NEIGHBOR_OFFSETS]
