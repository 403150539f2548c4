"""Formation building: consensus variables, fictitious-target pursuit, anonymous
slot assignment, and avoiding-angle boundary following.

Each robot chases a virtual point riding a fixed offset `c` ahead of its desired
slot; pursuing the slot itself would demand unbounded turn rates near arrival.
Slot offsets live in the frame aligned with the shared orientation variable, so
the whole pattern marches along the common heading at the common speed.

The turn and speed laws are discontinuous (sign/relay form).  At a 0.1 s step a
literal relay chatters with amplitude well above the formation tolerances, so
inside one step of each switching surface the commands are realised with their
saturated (exact-reach) equivalents; outside they match the relay exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .motion import DT, Limits, RobotState, wrap_angle

Point = Tuple[float, float]

PSI_DEADBAND = 0.02  # rad; sliding-surface dead zone for the turn law

MODE_PURSUIT = "pursuit"
MODE_BOUNDARY = "boundary"


@dataclass(frozen=True)
class FormationConsensus:
    """Per-robot consensus variables: heading, origin offsets and speed."""

    theta_t: float
    x_t: float
    y_t: float
    v_t: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.theta_t < math.pi:
            raise ValueError(f"theta_t must lie in [0, pi), got {self.theta_t}")


@dataclass(frozen=True)
class Configuration:
    """Slot offsets (metres, formation frame) and the pursuit offset c."""

    offsets: Tuple[Point, ...]
    c: float

    def __post_init__(self) -> None:
        if len(self.offsets) < 1:
            raise ValueError("configuration needs at least one slot")
        if not self.c > 0.0:
            raise ValueError("c must be > 0")


def validate_configuration(cfg: Configuration, lim: Limits) -> None:
    """The pursuit offset must exceed twice the minimum turn radius."""
    bound = 2.0 * lim.v_max / lim.omega_max
    if not cfg.c > bound:
        raise ValueError(f"c must exceed 2*v_max/omega_max = {bound}, got {cfg.c}")


def formation_consensus_update(
    fc: FormationConsensus,
    pos_k: Point,
    pos_k1: Point,
    neighbors: Sequence[Tuple[Point, FormationConsensus]],
) -> FormationConsensus:
    """One synchronous averaging step.

    Heading and speed are plain neighbourhood means; the origin variables average
    the sums (position + offset) and then subtract the robot's next position, so
    the sums themselves behave as plain averages.
    """
    n = 1 + len(neighbors)
    th = fc.theta_t
    vx = fc.v_t
    sx = pos_k[0] + fc.x_t
    sy = pos_k[1] + fc.y_t
    for (px, py), nfc in neighbors:
        th += nfc.theta_t
        vx += nfc.v_t
        sx += px + nfc.x_t
        sy += py + nfc.y_t
    return FormationConsensus(
        theta_t=th / n,
        x_t=sx / n - pos_k1[0],
        y_t=sy / n - pos_k1[1],
        v_t=vx / n,
    )


def _aligned_sum(pos: Point, fc: FormationConsensus) -> Tuple[float, float, float, float]:
    """Rotate the robot position and the (position + offset) sum into the
    consensus-aligned frame; returns (x', y', sum_x', sum_y')."""
    cos_t = math.cos(fc.theta_t)
    sin_t = math.sin(fc.theta_t)
    x, y = pos
    xp = x * cos_t + y * sin_t
    yp = -x * sin_t + y * cos_t
    sx = x + fc.x_t
    sy = y + fc.y_t
    sxp = sx * cos_t + sy * sin_t
    syp = -sx * sin_t + sy * cos_t
    return xp, yp, sxp, syp


def slot_anchor(fc: FormationConsensus, pos: Point, cfg: Configuration, slot: int, t: float) -> Point:
    """World position of the slot point implied by this robot's own estimates."""
    _, _, sxp, syp = _aligned_sum(pos, fc)
    ax = sxp + cfg.offsets[slot][0] + t * fc.v_t
    ay = syp + cfg.offsets[slot][1]
    cos_t = math.cos(fc.theta_t)
    sin_t = math.sin(fc.theta_t)
    return (ax * cos_t - ay * sin_t, ax * sin_t + ay * cos_t)


def fictitious_target(
    s: RobotState, fc: FormationConsensus, cfg: Configuration, slot: int, t: float
) -> Tuple[Point, bool]:
    """Pursuit point for the given slot, in world coordinates.

    Returns (target, behind): `behind` is true when the robot trails the slot along
    the formation axis, which also selects the fast branch of the speed law.
    """
    xp, yp, sxp, syp = _aligned_sum((s.x, s.y), fc)
    h = sxp + cfg.offsets[slot][0] + t * fc.v_t
    behind = xp <= h
    gx = (h + cfg.c) if behind else (xp + cfg.c)
    gy = syp + cfg.offsets[slot][1]
    cos_t = math.cos(fc.theta_t)
    sin_t = math.sin(fc.theta_t)
    return (gx * cos_t - gy * sin_t, gx * sin_t + gy * cos_t), behind


def formation_control(
    s: RobotState,
    g: Point,
    lim: Limits,
    *,
    behind: bool,
    align_theta: float,
    v_ref: float,
    c: float,
    dt: float = DT,
    psi_db: float = PSI_DEADBAND,
) -> Tuple[float, float]:
    """Pursuit command toward the fictitious target.

    Turn: full rate toward closing the angle between the velocity vector and the
    line of sight, zero inside the deadband, exact-reach within one step.  Speed:
    top speed while behind the slot, floor speed while ahead; within one step of
    the slot the speed that lands exactly on it (clamped to the hard bounds).
    """
    dx = g[0] - s.x
    dy = g[1] - s.y
    psi = wrap_angle(math.atan2(dy, dx) - s.theta)
    if abs(psi) <= psi_db:
        omega = 0.0
    else:
        omega = psi / dt
        if omega > lim.omega_max:
            omega = lim.omega_max
        elif omega < -lim.omega_max:
            omega = -lim.omega_max
    if behind:
        # Slot error recovered from the target: along-axis component minus c.
        dxp = dx * math.cos(align_theta) + dy * math.sin(align_theta)
        v = v_ref + (dxp - c) / dt
        if v > lim.v_max:
            v = lim.v_max
        elif v < lim.v_min:
            v = lim.v_min
    else:
        v = lim.v_min
    return v, omega


# --- anonymous slot assignment -------------------------------------------------


@dataclass(frozen=True)
class AnonymousState:
    """Current claimed slot plus the randomized reassignment parameters."""

    slot: int
    period_n: int
    detect_radius: float
    vacancy_eps: float

    def __post_init__(self) -> None:
        if self.period_n < 1:
            raise ValueError("period_n must be >= 1")
        if not 0.0 < self.vacancy_eps < self.detect_radius / 2.0:
            raise ValueError("need 0 < eps < R/2")


def p_graph(cfg: Configuration, detect_radius: float, vacancy_eps: float) -> Dict[int, List[int]]:
    """Adjacency over slots: an edge where offsets are within R - 2*eps."""
    limit = detect_radius - 2.0 * vacancy_eps
    n = len(cfg.offsets)
    adj: Dict[int, List[int]] = {i: [] for i in range(n)}
    for i in range(n):
        xi, yi = cfg.offsets[i]
        for j in range(i + 1, n):
            xj, yj = cfg.offsets[j]
            if math.hypot(xi - xj, yi - yj) <= limit:
                adj[i].append(j)
                adj[j].append(i)
    return adj


def p_graph_connected(adj: Dict[int, List[int]]) -> bool:
    if not adj:
        return False
    seen = {next(iter(adj))}
    stack = list(seen)
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == len(adj)


def anonymous_reassign(
    state: AnonymousState,
    fc: FormationConsensus,
    own_pos: Point,
    others: Sequence[Point],
    cfg: Configuration,
    adj: Dict[int, List[int]],
    t: float,
    rng: np.random.Generator,
) -> AnonymousState:
    """Randomized slot update, run at multiples of the reassignment period.

    Keep the slot unless another robot sits inside the vacancy radius of its
    anchor; otherwise draw uniformly from the current slot plus its vacant
    neighbours in the slot graph.  Only robots within the detection radius are
    visible for the occupancy tests.
    """
    sensed = [
        p for p in others
        if math.hypot(p[0] - own_pos[0], p[1] - own_pos[1]) <= state.detect_radius
    ]

    def occupied(slot: int) -> bool:
        ax, ay = slot_anchor(fc, own_pos, cfg, slot, t)
        eps2 = state.vacancy_eps * state.vacancy_eps
        for px, py in sensed:
            dx = px - ax
            dy = py - ay
            if dx * dx + dy * dy <= eps2:
                return True
        return False

    if not occupied(state.slot):
        return state
    pool = [state.slot] + [j for j in sorted(adj[state.slot]) if not occupied(j)]
    if len(pool) == 1:
        return state
    choice = pool[int(rng.integers(len(pool)))]
    if choice == state.slot:
        return state
    return AnonymousState(choice, state.period_n, state.detect_radius, state.vacancy_eps)


# --- avoiding-angle boundary following ------------------------------------------


@dataclass(frozen=True)
class AvoidParams:
    """Standoff distance, avoiding angle and sensor range; d0 = r_s * sin(phi0)."""

    d0: float
    phi0: float
    r_s: float

    def __post_init__(self) -> None:
        if not 0.0 < self.phi0 < math.pi / 2.0:
            raise ValueError("phi0 must lie in (0, pi/2)")
        if not self.r_s > 0.0:
            raise ValueError("r_s must be > 0")
        expected = self.r_s * math.sin(self.phi0)
        if abs(self.d0 - expected) > 1e-9:
            raise ValueError(f"d0 must equal r_s*sin(phi0) = {expected}, got {self.d0}")

    @classmethod
    def from_angle(cls, r_s: float, phi0: float) -> "AvoidParams":
        return cls(d0=r_s * math.sin(phi0), phi0=phi0, r_s=r_s)


def boundary_follow(
    readings: Sequence[Tuple[float, Optional[float]]],
    p: AvoidParams,
    lim: Limits,
    phi_tol: float = 0.0,
) -> Tuple[float, float]:
    """Wall-following command from a forward range fan.

    The reference is the farthest detectable obstacle point; the angle between the
    heading and that ray settles at the avoiding angle, which holds the standoff at
    d0.  A measured angle above the avoiding angle means the surface is falling
    away (turn toward it); below means it is closing in (turn away).
    """
    best_r = -1.0
    best_a = 0.0
    for ang, rng_val in readings:
        if rng_val is None or rng_val > p.r_s + 1e-12:
            continue
        if rng_val > best_r or (rng_val == best_r and abs(ang) < abs(best_a)):
            best_r = rng_val
            best_a = ang
    if best_r < 0.0:
        return lim.v_max, 0.0
    phi = abs(best_a)
    side = 1.0 if best_a >= 0.0 else -1.0
    if abs(phi - p.phi0) <= phi_tol:
        omega = 0.0
    elif phi > p.phi0:
        omega = side * lim.omega_max
    else:
        omega = -side * lim.omega_max
    return lim.v_max, omega


def mode_arbiter(
    mode: str,
    clear_streak: int,
    engaged: bool,
    goal_blocked: bool,
    hysteresis: int = 5,
) -> Tuple[str, int]:
    """Switch between pursuit and boundary following.

    Engage when any reading falls under the engage range; release only after the
    ray toward the formation target has been unobstructed for `hysteresis`
    consecutive steps, so a convex obstacle is followed right around until the
    way to the target is open.
    """
    if mode == MODE_PURSUIT:
        return (MODE_BOUNDARY, 0) if engaged else (MODE_PURSUIT, 0)
    if goal_blocked:
        return MODE_BOUNDARY, 0
    streak = clear_streak + 1
    if streak >= hysteresis:
        return MODE_PURSUIT, 0
    return MODE_BOUNDARY, streak


# --- shape presets ---------------------------------------------------------------


def edge_config(n: int, spacing: float = 2.0, c: float = 2.0) -> Configuration:
    """Chevron '>' pointing along the formation axis."""
    offsets = []
    for i in range(n):
        rank = (i + 1) // 2
        sign = 1.0 if i % 2 else -1.0
        offsets.append((-rank * spacing, sign * rank * spacing if rank else 0.0))
    return Configuration(tuple(offsets), c)


def line_config(n: int, spacing: float = 2.0, c: float = 2.0) -> Configuration:
    """Line '|' perpendicular to the formation axis."""
    mid = (n - 1) / 2.0
    return Configuration(tuple((0.0, (i - mid) * spacing) for i in range(n)), c)


def arc_config(n: int, radius: float = 6.0, span: float = math.pi / 2.0, c: float = 2.0) -> Configuration:
    """Arc '(' opening along the formation axis."""
    mid = (n - 1) / 2.0
    offsets = []
    for i in range(n):
        a = (i - mid) / max(n - 1, 1) * span
        offsets.append((radius * (math.cos(a) - 1.0), radius * math.sin(a)))
    return Configuration(tuple(offsets), c)


CONFIG_PRESETS = {
    "edge": edge_config,
    "line": line_config,
    "arc": arc_config,
}
