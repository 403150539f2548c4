"""Continuous motion between decisions: unicycle kinematics under hard limits.

The discrete index of the consensus/search rules advances when a robot arrives at
(or times out on) its waypoint; in between, commands are clamped, rate-limited and
integrated with explicit Euler at a fixed dt.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from . import world
from .topomap import SensorModel

Point = Tuple[float, float]

DT = 0.1                 # matches the simulators' sampling interval
K_HEADING = 2.0          # proportional heading gain, s^-1; stable well inside dt=0.1
HEADING_DEADBAND = 0.004  # rad; inside it the tracker holds course at full speed

TWO_PI = 2.0 * math.pi


_PI = math.pi


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    if -_PI < a <= _PI:
        return a
    if -TWO_PI < a < TWO_PI:
        # One subtraction suffices; identical to the fmod path for this range.
        return a - TWO_PI if a > 0.0 else a + TWO_PI
    a = math.fmod(a, TWO_PI)
    if a > _PI:
        a -= TWO_PI
    elif a <= -_PI:
        a += TWO_PI
    return a


@dataclass(frozen=True)
class RobotState:
    x: float
    y: float
    theta: float
    v: float = 0.0
    omega: float = 0.0

    @property
    def position(self) -> Point:
        return (self.x, self.y)


@dataclass(frozen=True)
class Limits:
    v_max: float
    omega_max: float
    v_min: float = 0.0
    accel: Optional[float] = None
    alpha: Optional[float] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.v_min < self.v_max:
            raise ValueError(f"need 0 <= v_min < v_max, got [{self.v_min}, {self.v_max}]")
        if not self.omega_max > 0.0:
            raise ValueError("omega_max must be > 0")
        if self.accel is not None and not self.accel > 0.0:
            raise ValueError("accel must be > 0 when given")
        if self.alpha is not None and not self.alpha > 0.0:
            raise ValueError("alpha must be > 0 when given")


@dataclass(frozen=True)
class WaypointNav:
    arrival_tol: float = 0.15
    et_factor: float = 3.0

    def __post_init__(self) -> None:
        if not self.arrival_tol > 0.0:
            raise ValueError("arrival_tol must be > 0")
        if not self.et_factor > 1.0:
            raise ValueError(f"et_factor must be > 1, got {self.et_factor}")


def clamp_commands(v_cmd: float, omega_cmd: float, lim: Limits) -> Tuple[float, float]:
    if v_cmd > lim.v_max:
        v_cmd = lim.v_max
    elif v_cmd < lim.v_min:
        v_cmd = lim.v_min
    if omega_cmd > lim.omega_max:
        omega_cmd = lim.omega_max
    elif omega_cmd < -lim.omega_max:
        omega_cmd = -lim.omega_max
    return v_cmd, omega_cmd


def integrate(s: RobotState, v_cmd: float, omega_cmd: float, dt: float, lim: Limits) -> RobotState:
    """Clamp and rate-limit the commands, then take one explicit Euler step."""
    if not dt > 0.0:
        raise ValueError("dt must be > 0")
    v_cmd, omega_cmd = clamp_commands(v_cmd, omega_cmd, lim)
    if lim.accel is not None:
        dv = lim.accel * dt
        if v_cmd > s.v + dv:
            v_cmd = s.v + dv
        elif v_cmd < s.v - dv:
            v_cmd = s.v - dv
    if lim.alpha is not None:
        dw = lim.alpha * dt
        if omega_cmd > s.omega + dw:
            omega_cmd = s.omega + dw
        elif omega_cmd < s.omega - dw:
            omega_cmd = s.omega - dw
    return RobotState(
        x=s.x + v_cmd * math.cos(s.theta) * dt,
        y=s.y + v_cmd * math.sin(s.theta) * dt,
        theta=wrap_angle(s.theta + omega_cmd * dt),
        v=v_cmd,
        omega=omega_cmd,
    )


def track_waypoint(
    s: RobotState, wp: Point, lim: Limits, nav: WaypointNav, k_heading: float = K_HEADING
) -> Tuple[float, float]:
    """Proportional heading controller toward wp; emits (0, 0) once arrived.

    Speed scales with the cosine of the heading error, dropping to the floor while
    the waypoint is behind the robot.  Inside a small deadband the course is held
    straight at full speed; the residual lateral error is millimetres per leg,
    orders below the arrival tolerance.
    """
    dx = wp[0] - s.x
    dy = wp[1] - s.y
    if dx * dx + dy * dy <= nav.arrival_tol * nav.arrival_tol:
        return 0.0, 0.0
    err = wrap_angle(math.atan2(dy, dx) - s.theta)
    if -HEADING_DEADBAND <= err <= HEADING_DEADBAND:
        return lim.v_max, 0.0
    omega = k_heading * err
    if omega > lim.omega_max:
        omega = lim.omega_max
    elif omega < -lim.omega_max:
        omega = -lim.omega_max
    scale = math.cos(err)
    v = lim.v_max * scale if scale > 0.0 else 0.0
    return v, omega


def avoid_blend(
    s: RobotState,
    w: world.Workspace,
    others: Sequence[Point],
    raw: Tuple[float, float],
    sensor: SensorModel,
    goal: Optional[Point] = None,
    brake_accel: float = 0.3,
) -> Tuple[float, float]:
    """Blend reactive repulsion from nearby geometry and robots into a raw command.

    Obstructions within range and roughly ahead steer the command sideways and
    brake it; when a goal is given, sources farther than the goal do not steer
    (the robot stops there first).  Independently of heading, speed is capped by
    the stopping-distance law sqrt(2*a*(d - d_safe)) against the nearest wall and
    the nearest robot, which rules out penetration under the acceleration limit.
    A dead-ahead blockage with no lateral signal breaks symmetry with a
    deterministic left turn.
    """
    r_avoid = sensor.r_s
    v_raw, w_raw = raw
    x, y = s.x, s.y
    cos_t = math.cos(s.theta)
    sin_t = math.sin(s.theta)
    goal_d = math.hypot(goal[0] - x, goal[1] - y) if goal is not None else math.inf
    brake = 0.8  # frontal braking window, metres

    f_lat = 0.0
    slow = 1.0
    blocked_ahead = False

    def add_source(px: float, py: float, reach: float) -> None:
        nonlocal f_lat, slow, blocked_ahead
        dx = px - x
        dy = py - y
        d = math.hypot(dx, dy)
        if d < 1e-12 or d >= r_avoid or d > reach:
            return
        fwd = dx * cos_t + dy * sin_t
        if fwd < 0.5 * d:
            return  # outside the frontal cone
        lat = -dx * sin_t + dy * cos_t
        push = 1.0 / max(d, 0.05) - 1.0 / r_avoid
        f_lat += -push if lat >= 0.0 else push  # steer away from the source
        if d < brake:
            slow = min(slow, d / brake)
        if abs(lat) < 0.35 * d:
            blocked_ahead = True

    v_cap = math.inf
    near = world.nearest_edge_point(w, (x, y), r_avoid)
    if near is not None:
        d_wall = math.hypot(near[0] - x, near[1] - y)
        # Creep floor: a robot parked inside the braking band (arrival overshoot)
        # must still be able to crawl out while the repulsion turns it away.
        v_cap = max(math.sqrt(2.0 * brake_accel * max(d_wall - 0.06, 0.0)), 0.04)
        add_source(near[0], near[1], goal_d + 0.2)
    front = world.raycast(w, world.Ray((x, y), s.theta, min(r_avoid, goal_d + 0.2)))
    if front is not None:
        add_source(x + front * cos_t, y + front * sin_t, goal_d + 0.2)
    for ox, oy in others:
        d_rob = math.hypot(ox - x, oy - y)
        # Softer bubble for peers so meetings cannot gridlock.
        cap = math.sqrt(2.0 * brake_accel * max(d_rob - 0.25, 0.0)) + 0.05
        if cap < v_cap:
            v_cap = cap
        add_source(ox, oy, goal_d + 0.5)

    if f_lat == 0.0 and slow == 1.0 and v_cap >= v_raw and not blocked_ahead:
        return raw
    if blocked_ahead and abs(f_lat) < 1e-6:
        f_lat = 1.0  # symmetric head-on case: deterministic left turn
    if f_lat > 4.0:
        f_lat = 4.0
    elif f_lat < -4.0:
        f_lat = -4.0
    v = v_raw * slow
    if v > v_cap:
        v = v_cap
    return v, w_raw + 1.5 * f_lat


def et_timeout(start_time: float, now: float, dist: float, v_ref: float, nav: WaypointNav) -> bool:
    """True when travel has exceeded the expected-time budget for the leg."""
    if not v_ref > 0.0:
        raise ValueError("v_ref must be > 0")
    return (now - start_time) > nav.et_factor * dist / v_ref
