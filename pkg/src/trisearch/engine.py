"""Episode engine: stage-one consensus locating, then stage-two grid search.

Continuous motion runs at a fixed dt; the discrete index of the locating and
search rules advances when robots arrive at (or time out on) their waypoints.
Everything is deterministic given (scenario, seed): one root seed is split per
robot and per subsystem with numpy SeedSequence spawn keys.

The per-tick arithmetic is inlined for speed; with ``exact_ops=True`` the engine
drives through the motion-module calls instead, and a regression test pins the
two paths to identical trajectories.
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import numpy as np

from . import topomap as tm
from . import world
from .consensus import LocatingState, consensus_converged, locating_update, spread
from .motion import (
    DT,
    HEADING_DEADBAND,
    K_HEADING,
    RobotState,
    avoid_blend,
    integrate,
    track_waypoint,
    wrap_angle,
)
from .netsim import build_graph, components, flood_exchange, joint_connectivity
from .scenario import SearchScenario, place_robots
from .search import (
    POLICY_MODIFIED,
    POLICY_RANDOM,
    POLICY_SEMIRANDOM,
    FullCoverage,
    Patrol,
    TargetLedger,
    Targets,
    next_waypoint_modified,
    next_waypoint_random,
    next_waypoint_semirandom,
    sense_targets,
)
from .trigrid import Coord, GridFrame, nearest_vertex, six_neighbors, vertex_point

Point = Tuple[float, float]

# Per-robot decision caps, in multiples of the reachable vertex count.
STEP_CAPS = {POLICY_RANDOM: 50, POLICY_SEMIRANDOM: 20, POLICY_MODIFIED: 3}
STAGE1_ROUND_CAP = 2000

# SeedSequence spawn-key tags (the documented splitting scheme).
_SS_PLACEMENT = 0
_SS_POLICY = 1
_SS_NOISE = 2

_GRID_CACHE: "weakref.WeakKeyDictionary[world.Workspace, world.ClearanceGrid]" = (
    weakref.WeakKeyDictionary()
)


def _clearance_grid(w: world.Workspace) -> world.ClearanceGrid:
    grid = _GRID_CACHE.get(w)
    if grid is None:
        grid = world.ClearanceGrid(w, cell=0.25)
        _GRID_CACHE[w] = grid
    return grid


@dataclass
class RunMetrics:
    """What the experiment tables aggregate, plus per-run bookkeeping."""

    completed: bool
    stage1_rounds: int
    stage1_time_s: float
    decision_steps: int
    mission_time_s: Optional[float]
    path_lengths: Tuple[float, ...]
    visited_vertices: int
    revisits: int
    conflicts: int
    reachable_vertices: int
    joint_connectivity_ok: bool


@dataclass
class EpisodeResult:
    metrics: RunMetrics
    frame: GridFrame
    reachable: FrozenSet[Coord]
    visited: FrozenSet[Coord]
    stage1_vertices: Tuple[Point, ...]
    trajectory: Optional[List[Tuple[float, int, float, float, float, str]]] = None
    consensus_trace: Optional[List[Tuple[float, float]]] = None


class _Robot:
    __slots__ = (
        "idx", "x", "y", "theta", "v", "omega", "loc", "map", "rng",
        "wp_x", "wp_y", "wp_coord", "deadline", "settled", "timed_out",
        "idle", "decisions", "path_len", "peers", "pending", "pending_dels",
        "current", "cruising",
    )

    def __init__(self, idx: int, x: float, y: float, theta: float, loc: LocatingState, rng) -> None:
        self.idx = idx
        self.x = x
        self.y = y
        self.theta = theta
        self.v = 0.0
        self.omega = 0.0
        self.loc = loc
        self.map: Optional[tm.TopoMap] = None
        self.rng = rng
        self.wp_x = x
        self.wp_y = y
        self.wp_coord: Optional[Coord] = None
        self.deadline = math.inf
        self.settled = True
        self.timed_out = False
        self.idle = False
        self.decisions = 0
        self.path_len = 0.0
        self.peers: FrozenSet[int] = frozenset()
        self.pending: List[Coord] = []
        self.pending_dels: List[Coord] = []
        self.current: Optional[Coord] = None
        self.cruising = False

    def state(self) -> RobotState:
        return RobotState(self.x, self.y, self.theta, self.v, self.omega)


def _admissible(w: world.Workspace, p: Point) -> bool:
    return world.contains_free(w, p) and world.clearance(w, p) >= w.margin


def _guarded_snap(scn: SearchScenario, loc: LocatingState, pos: Point) -> Point:
    """Nearest vertex of the robot's own grid that respects free space and margin.

    The raw nearest vertex can fall outside the workspace near a wall; the grid
    choice rule allows any closest vertex, so the search widens ring by ring.
    """
    frame = GridFrame(loc.q, loc.theta, scn.side)
    a0, b0 = nearest_vertex(frame, pos)
    candidates = []
    for da in range(-3, 4):
        for db in range(-3, 4):
            c = (a0 + da, b0 + db)
            v = vertex_point(frame, c)
            candidates.append((math.hypot(v[0] - pos[0], v[1] - pos[1]), c, v))
    candidates.sort(key=lambda item: (item[0], item[1]))
    for _, _, v in candidates:
        if _admissible(scn.workspace, v):
            return v
    return pos  # boxed in: hold position this round


def _reachable_set(scn: SearchScenario, frame: GridFrame, seeds: Sequence[Coord]) -> FrozenSet[Coord]:
    """Ground truth: vertices reachable through margin-respecting, line-of-sight
    six-neighbour hops from the stage-one vertices."""
    w = scn.workspace
    ok: Dict[Coord, bool] = {}

    def admissible(c: Coord) -> bool:
        res = ok.get(c)
        if res is None:
            res = _admissible(w, vertex_point(frame, c))
            ok[c] = res
        return res

    seen: Set[Coord] = set()
    stack = [c for c in seeds if admissible(c)]
    seen.update(stack)
    while stack:
        cur = stack.pop()
        pcur = vertex_point(frame, cur)
        for nb in six_neighbors(cur):
            if nb in seen or not admissible(nb):
                continue
            if world.segment_blocked(w, pcur, vertex_point(frame, nb)):
                continue
            seen.add(nb)
            stack.append(nb)
    return frozenset(seen)


def run_episode(
    scn: SearchScenario,
    seed: int | Sequence[int],
    *,
    record_traj: bool = False,
    traj_stride: int = 1,
    record_consensus: bool = False,
    validate: bool = True,
    exact_ops: bool = False,
) -> EpisodeResult:
    """Run one deterministic two-stage episode."""
    root = np.random.SeedSequence(seed)
    place_rng = np.random.default_rng(np.random.SeedSequence(
        entropy=root.entropy, spawn_key=(_SS_PLACEMENT,)))
    w = scn.workspace
    grid = _clearance_grid(w)
    gx0 = grid._x0
    gy0 = grid._y0
    gnx = grid._nx
    gny = grid._ny
    gvals = grid._values
    ginv = 1.0 / grid.cell

    dt = DT
    lim = scn.limits
    nav = scn.nav
    sensor = scn.sensor
    v_max = lim.v_max
    v_min = lim.v_min
    om_max = lim.omega_max
    accel = lim.accel
    alpha = lim.alpha
    tol = nav.arrival_tol
    tol2 = tol * tol
    et_over_v = nav.et_factor / v_max
    r_avoid = sensor.r_s
    r_avoid2 = r_avoid * r_avoid
    brake_a = accel if accel is not None else 4.0
    half_side = 0.5 * scn.side
    cos = math.cos
    sin = math.sin
    atan2 = math.atan2
    hypot = math.hypot

    poses = place_robots(scn, place_rng)
    robots: List[_Robot] = []
    for i, (x, y, heading) in enumerate(poses):
        rng = np.random.default_rng(np.random.SeedSequence(
            entropy=root.entropy, spawn_key=(_SS_POLICY, i)))
        robots.append(_Robot(i, x, y, heading, LocatingState(heading % math.pi, (x, y)), rng))
    n = len(robots)
    noise_rng = np.random.default_rng(np.random.SeedSequence(
        entropy=root.entropy, spawn_key=(_SS_NOISE,)))

    trajectory: Optional[List[Tuple[float, int, float, float, float, str]]] = (
        [] if record_traj else None
    )
    consensus_trace: Optional[List[Tuple[float, float]]] = [] if record_consensus else None

    def record(t: float, mode: str) -> None:
        for r in robots:
            trajectory.append((round(t, 6), r.idx, r.x, r.y, r.theta, mode))

    def set_waypoint(r: _Robot, wx: float, wy: float, now: float) -> None:
        r.wp_x = wx
        r.wp_y = wy
        d = hypot(wx - r.x, wy - r.y)
        if d < half_side:
            d = half_side
        r.deadline = now + et_over_v * d
        r.settled = False
        r.cruising = False  # heading is stale for the new leg

    def step_robot(r: _Robot, others: Optional[List[Point]]) -> bool:
        """One motion tick toward the waypoint; True when arrived.

        Mirrors track_waypoint -> avoid_blend -> integrate exactly; the fused
        branches repeat the same float operations without the call overhead.
        """
        dx = r.wp_x - r.x
        dy = r.wp_y - r.y
        d2 = dx * dx + dy * dy
        if d2 <= tol2:
            r.cruising = False
            return True
        ix = int((r.x - gx0) * ginv)
        iy = int((r.y - gy0) * ginv)
        if 0 <= ix < gnx and 0 <= iy < gny:
            lb = gvals[iy * gnx + ix]
        else:
            lb = 0.0
        # Geometry farther than the waypoint cannot obstruct this leg.
        gated = (lb < r_avoid and lb < math.sqrt(d2) + 0.25) or others
        if exact_ops:
            s = r.state()
            v_cmd, w_cmd = track_waypoint(s, (r.wp_x, r.wp_y), lim, nav)
            if gated:
                v_cmd, w_cmd = avoid_blend(
                    s, w, others or [], (v_cmd, w_cmd), sensor,
                    goal=(r.wp_x, r.wp_y), brake_accel=brake_a,
                )
            new = integrate(s, v_cmd, w_cmd, dt, lim)
            r.x = new.x
            r.y = new.y
            r.theta = new.theta
            r.path_len += new.v * dt
            r.v = new.v
            r.omega = new.omega
        else:
            err = wrap_angle(atan2(dy, dx) - r.theta)
            if -HEADING_DEADBAND <= err <= HEADING_DEADBAND:
                v_cmd = v_max
                w_cmd = 0.0
            else:
                w_cmd = K_HEADING * err
                if w_cmd > om_max:
                    w_cmd = om_max
                elif w_cmd < -om_max:
                    w_cmd = -om_max
                scale = cos(err)
                v_cmd = v_max * scale if scale > 0.0 else 0.0
            if gated:
                v_cmd, w_cmd = avoid_blend(
                    r.state(), w, others or [], (v_cmd, w_cmd), sensor,
                    goal=(r.wp_x, r.wp_y), brake_accel=brake_a,
                )
            if v_cmd > v_max:
                v_cmd = v_max
            elif v_cmd < v_min:
                v_cmd = v_min
            if w_cmd > om_max:
                w_cmd = om_max
            elif w_cmd < -om_max:
                w_cmd = -om_max
            if accel is not None:
                dv = accel * dt
                if v_cmd > r.v + dv:
                    v_cmd = r.v + dv
                elif v_cmd < r.v - dv:
                    v_cmd = r.v - dv
            if alpha is not None:
                dw = alpha * dt
                if w_cmd > r.omega + dw:
                    w_cmd = r.omega + dw
                elif w_cmd < r.omega - dw:
                    w_cmd = r.omega - dw
            r.x += v_cmd * cos(r.theta) * dt
            r.y += v_cmd * sin(r.theta) * dt
            r.theta = wrap_angle(r.theta + w_cmd * dt)
            r.path_len += v_cmd * dt
            r.v = v_cmd
            r.omega = w_cmd
        r.cruising = not gated and r.omega == 0.0 and r.v == v_max
        if validate:
            assert abs(r.omega) <= om_max + 1e-9, "turn-rate limit violated"
            assert v_min - 1e-9 <= r.v <= v_max + 1e-9, "speed limit violated"
            if lb <= 0.0:
                assert world.contains_free(w, (r.x, r.y)), "robot left free space"
        dx = r.wp_x - r.x
        dy = r.wp_y - r.y
        return dx * dx + dy * dy <= tol2

    _no_prox: List[Optional[List[Point]]] = [None]

    def proximity_lists() -> List[Optional[List[Point]]]:
        if n == 1:
            return _no_prox
        out: List[Optional[List[Point]]] = [None] * n
        for i in range(n):
            ri = robots[i]
            if ri.idle:
                continue
            xi = ri.x
            yi = ri.y
            near: Optional[List[Point]] = None
            for j in range(n):
                if j == i:
                    continue
                rj = robots[j]
                dx = rj.x - xi
                dy = rj.y - yi
                if dx * dx + dy * dy < r_avoid2:
                    if near is None:
                        near = []
                    near.append((rj.x, rj.y))
            out[i] = near
        return out

    # ---- stage one: consensus variables locating --------------------------------
    t = 0.0
    rounds = 0
    window: List = []
    joint_ok = True
    noise = scn.consensus_noise
    while True:
        if rounds >= STAGE1_ROUND_CAP:
            raise RuntimeError("stage one failed to converge; scenario is ill-posed")
        positions = [(r.x, r.y) for r in robots]
        graph = build_graph(positions, scn.r_c)
        window.append(graph)
        if len(window) >= scn.k_window:
            if not joint_connectivity(window):
                joint_ok = False
            window.clear()
        neigh = {r.idx: [] for r in robots}
        for i, j in graph.edges:
            neigh[i].append(j)
            neigh[j].append(i)
        current = [r.loc for r in robots]
        new_locs = []
        for r in robots:
            incoming = []
            for j in neigh[r.idx]:
                lj = current[j]
                if noise > 0.0:
                    th = min(max(lj.theta + noise_rng.normal(0.0, noise), 0.0), math.pi - 1e-9)
                    lj = LocatingState(th, (
                        lj.q[0] + noise_rng.normal(0.0, noise),
                        lj.q[1] + noise_rng.normal(0.0, noise),
                    ))
                incoming.append(lj)
            new_locs.append(locating_update(r.loc, incoming))
        for r, loc in zip(robots, new_locs):
            r.loc = loc
            wx, wy = _guarded_snap(scn, loc, (r.x, r.y))
            set_waypoint(r, wx, wy, t)
            dxx = wx - r.x
            dyy = wy - r.y
            r.settled = dxx * dxx + dyy * dyy <= tol2
        while not all(r.settled for r in robots):
            t += dt
            prox = proximity_lists()
            for r in robots:
                if r.settled:
                    continue
                if step_robot(r, prox[r.idx]):
                    r.settled = True
                elif t > r.deadline:
                    r.settled = True
                    r.timed_out = True
            if trajectory is not None and int(round(t / dt)) % traj_stride == 0:
                record(t, "locating")
        rounds += 1
        if consensus_trace is not None:
            consensus_trace.append(spread([r.loc for r in robots]))
        if consensus_converged([r.loc for r in robots], scn.tol_theta, scn.tol_q):
            if not any(r.timed_out for r in robots):
                break
        for r in robots:
            r.timed_out = False

    stage1_rounds = rounds
    stage1_time = t

    # ---- common frame and ground truth -------------------------------------------
    mean_theta = sum(r.loc.theta for r in robots) / n
    mean_q = (
        sum(r.loc.q[0] for r in robots) / n,
        sum(r.loc.q[1] for r in robots) / n,
    )
    frame = GridFrame(mean_q, min(mean_theta, math.pi - 1e-12), scn.side)
    stage1_vertices = tuple((r.wp_x, r.wp_y) for r in robots)
    start_coords = [nearest_vertex(frame, (r.x, r.y)) for r in robots]
    reachable = _reachable_set(scn, frame, start_coords)
    cap = STEP_CAPS[scn.policy] * max(len(reachable), 1)

    # ---- stage two ----------------------------------------------------------------
    mission = scn.mission
    is_patrol = isinstance(mission, Patrol)
    patrol_flag = is_patrol
    ledger = TargetLedger(len(mission.positions)) if isinstance(mission, Targets) else None
    targets = mission.positions if isinstance(mission, Targets) else ()

    gt_visited: Set[Coord] = set()
    revisits = 0
    conflicts = 0
    team_decisions = 0
    next_reset = (
        mission.reset_period
        if is_patrol and scn.policy == POLICY_MODIFIED and mission.reset_period
        else None
    )

    for r, c0 in zip(robots, start_coords):
        r.map = tm.TopoMap(frame)
        r.current = c0
        r.peers = frozenset()

    policy = scn.policy

    def choose(r: _Robot) -> Optional[Coord]:
        if policy == POLICY_RANDOM:
            return next_waypoint_random(r.map, r.current, r.rng, patrol=patrol_flag)
        if policy == POLICY_SEMIRANDOM:
            return next_waypoint_semirandom(r.map, r.current, r.rng, patrol=patrol_flag)
        return next_waypoint_modified(r.map, (r.x, r.y))

    def adopt(r: _Robot, c: Coord, now: float) -> None:
        nonlocal conflicts, team_decisions
        for o in robots:
            if o is not r and o.wp_coord == c and not o.idle:
                conflicts += 1
                break
        r.wp_coord = c
        wx, wy = r.map.vertex_xy(c)
        set_waypoint(r, wx, wy, now)
        r.idle = False
        r.decisions += 1
        team_decisions += 1

    def on_arrival(r: _Robot) -> None:
        nonlocal revisits
        c = r.wp_coord
        r.current = c
        if c in gt_visited:
            revisits += 1
        else:
            gt_visited.add(c)
        if tm.mark_visited(r.map, c):
            r.pending.append(c)
        r.pending.extend(tm.detect_vertices(r.map, (r.x, r.y), w, sensor))

    def exchange_and_decide(event_robots: List[_Robot], now: float) -> None:
        nonlocal next_reset
        positions = [(r.x, r.y) for r in robots]
        graph = build_graph(positions, scn.r_c)
        comps = components(graph)
        comp_idx = {}
        for ci, comp in enumerate(comps):
            for i in comp:
                comp_idx[i] = ci
        full_sync: Set[int] = set()
        new_peers = {}
        for r in robots:
            peers = frozenset(comps[comp_idx[r.idx]] - {r.idx})
            new_peers[r.idx] = peers
            if peers - r.peers:
                full_sync.add(comp_idx[r.idx])
        outboxes: List[List] = [[] for _ in robots]
        for r in robots:
            if comp_idx[r.idx] in full_sync:
                outboxes[r.idx] = [tm.full_packet(r.map, r.idx)]
                r.pending.clear()
                r.pending_dels.clear()
            elif r.pending or r.pending_dels:
                outboxes[r.idx] = [
                    tm.packet_for(r.map, r.idx, r.pending, deletions=r.pending_dels)
                ]
                r.pending.clear()
                r.pending_dels.clear()
        if any(outboxes):
            for r, inbox in zip(robots, flood_exchange(graph, outboxes)):
                for pkt in inbox:
                    tm.merge(r.map, pkt)
        for r in robots:
            r.peers = new_peers[r.idx]
        if next_reset is not None and team_decisions >= next_reset:
            for r in robots:
                tm.reset_visited(r.map)
            next_reset += mission.reset_period
        need = {r.idx for r in event_robots}
        for r in robots:
            if r.idle and r.map.unvisited:
                need.add(r.idx)
        for r in robots:
            if r.idx not in need:
                continue
            c = choose(r)
            if c is None:
                r.idle = True
                r.wp_coord = None
            else:
                adopt(r, c, now)

    # Initial arrivals: every robot stands on its stage-one vertex.
    for r in robots:
        r.wp_coord = r.current
        r.wp_x, r.wp_y = r.map.vertex_xy(r.current)
        on_arrival(r)
    exchange_and_decide(list(robots), t)

    completed = False
    mission_time: Optional[float] = None
    stage2_start = t
    non_terminated = False
    tick = 0
    horizon = scn.patrol_horizon * n
    r_s2 = sensor.r_s * sensor.r_s

    if ledger is not None:
        sense_targets(ledger, targets, [(r.x, r.y) for r in robots], sensor.r_s)
        if ledger.all_detected:
            completed = True
            mission_time = 0.0

    def macro_horizon() -> int:
        """Ticks that can be skipped while every active robot cruises straight.

        Bounded so that no arrival, timeout, avoidance gate, robot proximity or
        target detection can occur inside the jump; clearance is 1-Lipschitz, so
        the conservative grid bound shrinks at most by the distance travelled.
        """
        k = 1 << 20
        for r in robots:
            if r.idle:
                continue
            vdt = r.v * dt
            dx = r.wp_x - r.x
            dy = r.wp_y - r.y
            dg = math.sqrt(dx * dx + dy * dy)
            k = min(k, int((dg - tol) / vdt) - 1)
            k = min(k, int((r.deadline - t) / dt) - 1)
            ix = int((r.x - gx0) * ginv)
            iy = int((r.y - gy0) * ginv)
            lb = gvals[iy * gnx + ix] if 0 <= ix < gnx and 0 <= iy < gny else 0.0
            if lb < dg + 0.25:  # geometry not ruled out by the goal gate
                k = min(k, int((lb - r_avoid) / vdt))
            if k < 4:
                return 0
        if n > 1:
            for i in range(n):
                ri = robots[i]
                for j in range(i + 1, n):
                    rj = robots[j]
                    closing = (0.0 if ri.idle else ri.v) + (0.0 if rj.idle else rj.v)
                    if closing <= 0.0:
                        continue
                    ddx = ri.x - rj.x
                    ddy = rj.y - ri.y
                    dist = math.hypot(ri.x - rj.x, ri.y - rj.y)
                    k = min(k, int((dist - r_avoid) / (closing * dt)))
                    if k < 4:
                        return 0
        if ledger is not None:
            for ti, (tx, ty) in enumerate(targets):
                if ledger.flags[ti]:
                    continue
                for r in robots:
                    if r.idle:
                        continue
                    dist = math.hypot(r.x - tx, r.y - ty)
                    k = min(k, int((dist - sensor.r_s) / (r.v * dt)))
                    if k < 4:
                        return 0
        return k

    team_idle = all(r.idle for r in robots)
    while not completed and not non_terminated:
        if team_idle:
            if isinstance(mission, FullCoverage):
                completed = True
                mission_time = t - stage2_start
            break
        if trajectory is None and not exact_ops:
            cruising_all = True
            for r in robots:
                if not r.idle and not r.cruising:
                    cruising_all = False
                    break
            if cruising_all:
                k = macro_horizon()
                if k >= 4:
                    jump = k * dt
                    for r in robots:
                        if r.idle:
                            continue
                        r.x += r.v * cos(r.theta) * jump
                        r.y += r.v * sin(r.theta) * jump
                        r.path_len += r.v * jump
                    t += jump
                    tick += k
        t += dt
        tick += 1
        events: List[_Robot] = []
        prox = proximity_lists()
        for r in robots:
            if r.idle:
                continue
            if step_robot(r, prox[r.idx]):
                events.append(r)
            elif t > r.deadline:
                if tm.delete_vertex(r.map, r.wp_coord):
                    r.pending_dels.append(r.wp_coord)
                events.append(r)
                r.timed_out = True
        if ledger is not None:
            for ti, (tx, ty) in enumerate(targets):
                if ledger.flags[ti]:
                    continue
                for r in robots:
                    ddx = r.x - tx
                    ddy = r.y - ty
                    if ddx * ddx + ddy * ddy <= r_s2:
                        ledger.mark(ti)
                        break
            if ledger.all_detected:
                completed = True
                mission_time = t - stage2_start
        if trajectory is not None and tick % traj_stride == 0:
            record(t, "search")
        if completed:
            break
        if events:
            for r in events:
                if not r.timed_out:
                    on_arrival(r)
                r.timed_out = False
            exchange_and_decide(events, t)
            team_idle = all(r.idle for r in robots)
            if any(r.decisions > cap for r in robots):
                non_terminated = True
            if is_patrol and team_decisions >= horizon:
                break

    if trajectory is not None:
        record(t, "end")

    metrics = RunMetrics(
        completed=completed,
        stage1_rounds=stage1_rounds,
        stage1_time_s=round(stage1_time, 9),
        decision_steps=team_decisions,
        mission_time_s=round(mission_time, 9) if mission_time is not None else None,
        path_lengths=tuple(round(r.path_len, 9) for r in robots),
        visited_vertices=len(gt_visited),
        revisits=revisits,
        conflicts=conflicts,
        reachable_vertices=len(reachable),
        joint_connectivity_ok=joint_ok,
    )
    return EpisodeResult(
        metrics=metrics,
        frame=frame,
        reachable=reachable,
        visited=frozenset(gt_visited),
        stage1_vertices=stage1_vertices,
        trajectory=trajectory,
        consensus_trace=consensus_trace,
    )
