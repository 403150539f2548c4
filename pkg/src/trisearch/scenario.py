"""Scenario files: a small versioned key-value format, loaders and validation.

Lines are `key = value` with `#` comments; repeatable keys (obstacle, target,
pose, offset) accumulate.  Points are `x,y`, polygons `x1,y1; x2,y2; ...`,
lengths in metres, angles in radians, times in seconds.  `schema_version = 1`
is required.  Two scenario types exist: `search` (two-stage grid search) and
`formation` (marching pattern with obstacle avoidance).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import world
from .formation import CONFIG_PRESETS, AvoidParams, Configuration, p_graph, p_graph_connected, validate_configuration
from .motion import Limits, WaypointNav
from .netsim import build_graph, components
from .search import POLICIES, FullCoverage, Mission, Patrol, Targets
from .topomap import SensorModel
from .world import Workspace, clearance, contains_free

Point = Tuple[float, float]

SCHEMA_VERSION = 1
SQRT3 = math.sqrt(3.0)

# Search-mode motion caps (differential-drive platform defaults).
SEARCH_LIMITS = Limits(v_max=0.4, omega_max=1.74, v_min=0.0, accel=0.3, alpha=1.74)
# Formation-mode caps; the formation law switches speed discontinuously, so no
# acceleration caps apply there.
FORMATION_LIMITS = Limits(v_max=1.5, omega_max=2.0, v_min=0.2)


class ScenarioError(ValueError):
    """Malformed or inconsistent scenario file."""


@dataclass
class SearchScenario:
    name: str
    workspace: Workspace
    robots: int
    policy: str
    mission: Mission
    side: float
    r_c: float
    sensor: SensorModel
    limits: Limits = SEARCH_LIMITS
    nav: WaypointNav = WaypointNav(arrival_tol=0.3, et_factor=3.0)
    poses: Optional[Tuple[Tuple[float, float, float], ...]] = None
    tol_theta: float = 1e-4
    tol_q: float = 1e-3
    consensus_noise: float = 0.0
    k_window: int = 10
    patrol_horizon: int = 200

    def __post_init__(self) -> None:
        if self.robots < 1:
            raise ScenarioError("robots must be >= 1")
        if self.policy not in POLICIES:
            raise ScenarioError(f"unknown policy {self.policy!r}")
        if not self.side > 0.0 or not self.r_c > 0.0:
            raise ScenarioError("side and r_c must be > 0")
        if self.poses is not None and len(self.poses) != self.robots:
            raise ScenarioError("pose count must match robot count")
        if isinstance(self.mission, Targets):
            for t in self.mission.positions:
                if not contains_free(self.workspace, t):
                    raise ScenarioError(f"target {t} is not in free space")


@dataclass
class FormationScenario:
    name: str
    workspace: Workspace
    robots: int
    config: Configuration
    anonymous: bool
    duration: float
    r_c: float
    limits: Limits = FORMATION_LIMITS
    avoid: AvoidParams = AvoidParams.from_angle(2.0, math.radians(30.0))
    n_rays: int = 37
    engage_range: float = 1.5
    hysteresis: int = 5
    period_n: int = 30
    detect_radius: float = 12.0
    vacancy_eps: float = 0.5
    spawn: Tuple[Point, Point] = ((-8.0, -8.0), (8.0, 8.0))
    heading_range: Tuple[float, float] = (0.0, math.pi - 1e-9)
    robot_radius: float = 0.25
    psi_deadband: float = 0.02

    def __post_init__(self) -> None:
        if self.robots != len(self.config.offsets):
            raise ScenarioError("robot count must match configuration slots")
        if not self.duration > 0.0:
            raise ScenarioError("duration must be > 0")
        validate_configuration(self.config, self.limits)
        if not 0.0 < self.vacancy_eps < self.detect_radius / 2.0:
            raise ScenarioError("need 0 < vacancy_eps < detect_radius/2")
        if self.anonymous:
            adj = p_graph(self.config, self.detect_radius, self.vacancy_eps)
            if not p_graph_connected(adj):
                raise ScenarioError("slot graph is not connected for (R, eps)")
        lo, hi = self.heading_range
        if not (0.0 <= lo < hi < math.pi):
            raise ScenarioError("heading_range must satisfy 0 <= lo < hi < pi")


Scenario = object  # SearchScenario | FormationScenario


def _parse_point(value: str, where: str) -> Point:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 2:
        raise ScenarioError(f"{where}: expected 'x,y', got {value!r}")
    try:
        return (float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _parse_polygon(value: str, where: str) -> List[Point]:
    return [_parse_point(part, where) for part in value.split(";") if part.strip()]


def _parse_kv(text: str) -> List[Tuple[int, str, str]]:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ScenarioError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        rows.append((lineno, key.strip().lower(), value.strip()))
    return rows


_REPEATABLE = {"obstacle", "target", "pose", "offset"}


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    rows = _parse_kv(text)
    scalars: Dict[str, str] = {}
    lists: Dict[str, List[str]] = {k: [] for k in _REPEATABLE}
    for lineno, key, value in rows:
        if key in _REPEATABLE:
            lists[key].append(value)
        elif key in scalars:
            raise ScenarioError(f"line {lineno}: duplicate key {key!r}")
        else:
            scalars[key] = value

    version = scalars.pop("schema_version", None)
    if version is None:
        raise ScenarioError("missing schema_version")
    if int(version) != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version}")

    kind = scalars.pop("type", "search")
    scn_name = scalars.pop("name", name)

    def take_float(key: str, default: Optional[float] = None) -> Optional[float]:
        if key in scalars:
            return float(scalars.pop(key))
        return default

    def take_int(key: str, default: Optional[int] = None) -> Optional[int]:
        if key in scalars:
            return int(scalars.pop(key))
        return default

    def take_bool(key: str, default: bool = False) -> bool:
        if key in scalars:
            raw = scalars.pop(key).lower()
            if raw in ("true", "1", "yes"):
                return True
            if raw in ("false", "0", "no"):
                return False
            raise ScenarioError(f"{key}: expected boolean, got {raw!r}")
        return default

    boundary = scalars.pop("boundary", None)
    if boundary is None:
        raise ScenarioError("missing boundary")
    margin = take_float("margin", 0.35)
    workspace = Workspace(
        _parse_polygon(boundary, "boundary"),
        [_parse_polygon(o, f"obstacle {i}") for i, o in enumerate(lists["obstacle"])],
        margin=margin,
    )

    if kind == "search":
        side = take_float("side", 2.0)
        r_s = take_float("r_s", side / SQRT3)
        sensor = SensorModel(
            r_s=r_s,
            n_rays=take_int("n_rays", 19),
            max_range=take_float("sonar_range", 5.0),
        )
        limits = Limits(
            v_max=take_float("v_max", SEARCH_LIMITS.v_max),
            omega_max=take_float("omega_max", SEARCH_LIMITS.omega_max),
            v_min=take_float("v_min", SEARCH_LIMITS.v_min),
            accel=take_float("accel", SEARCH_LIMITS.accel),
            alpha=take_float("alpha", SEARCH_LIMITS.alpha),
        )
        nav = WaypointNav(
            arrival_tol=take_float("arrival_tol", 0.3),
            et_factor=take_float("et_factor", 3.0),
        )
        mission_kind = scalars.pop("mission", "coverage")
        if mission_kind == "coverage":
            mission: Mission = FullCoverage()
        elif mission_kind == "targets":
            mission = Targets(tuple(_parse_point(t, "target") for t in lists["target"]))
        elif mission_kind == "patrol":
            reset = take_int("reset_period", None)
            mission = Patrol(reset_period=reset)
        else:
            raise ScenarioError(f"unknown mission {mission_kind!r}")
        poses = None
        if lists["pose"]:
            parsed = []
            for p in lists["pose"]:
                parts = [float(v) for v in p.split(",")]
                if len(parts) != 3:
                    raise ScenarioError(f"pose: expected 'x,y,theta', got {p!r}")
                parsed.append(tuple(parts))
            poses = tuple(parsed)
        scn = SearchScenario(
            name=scn_name,
            workspace=workspace,
            robots=take_int("robots", 3),
            policy=scalars.pop("policy", "random"),
            mission=mission,
            side=side,
            r_c=take_float("r_c", 10.0),
            sensor=sensor,
            limits=limits,
            nav=nav,
            poses=poses,
            tol_theta=take_float("tol_theta", 1e-4),
            tol_q=take_float("tol_q", 1e-3),
            consensus_noise=take_float("consensus_noise", 0.0),
            k_window=take_int("k_window", 10),
            patrol_horizon=take_int("patrol_horizon", 200),
        )
    elif kind == "formation":
        robots = take_int("robots", 5)
        spacing = take_float("spacing", 2.0)
        c = take_float("c", 2.0)
        if lists["offset"]:
            offsets = tuple(_parse_point(o, "offset") for o in lists["offset"])
            config = Configuration(offsets, c=c)
        else:
            preset = scalars.pop("config", "edge")
            if preset not in CONFIG_PRESETS:
                raise ScenarioError(f"unknown config preset {preset!r}")
            if preset == "arc":
                config = CONFIG_PRESETS[preset](robots, take_float("arc_radius", 6.0), c=c)
            else:
                config = CONFIG_PRESETS[preset](robots, spacing, c=c)
        limits = Limits(
            v_max=take_float("v_max", FORMATION_LIMITS.v_max),
            omega_max=take_float("omega_max", FORMATION_LIMITS.omega_max),
            v_min=take_float("v_min", FORMATION_LIMITS.v_min),
        )
        r_s = take_float("r_s", 2.0)
        phi0 = math.radians(take_float("phi0_deg", 30.0))
        spawn_raw = scalars.pop("spawn", None)
        if spawn_raw is not None:
            pts = _parse_polygon(spawn_raw, "spawn")
            if len(pts) != 2:
                raise ScenarioError("spawn: expected two corner points")
            spawn = (pts[0], pts[1])
        else:
            spawn = ((-8.0, -8.0), (8.0, 8.0))
        heading_raw = scalars.pop("heading_range", None)
        if heading_raw is not None:
            heading = _parse_point(heading_raw, "heading_range")
        else:
            heading = (0.0, math.pi - 1e-9)
        scn = FormationScenario(
            name=scn_name,
            workspace=workspace,
            robots=robots,
            config=config,
            anonymous=take_bool("anonymous", False),
            duration=take_float("duration", 120.0),
            r_c=take_float("r_c", 15.0),
            limits=limits,
            avoid=AvoidParams.from_angle(r_s, phi0),
            n_rays=take_int("n_rays", 37),
            engage_range=take_float("engage_range", 1.5),
            hysteresis=take_int("hysteresis", 5),
            period_n=take_int("period_n", 30),
            detect_radius=take_float("detect_radius", 12.0),
            vacancy_eps=take_float("vacancy_eps", 0.5),
            spawn=spawn,
            heading_range=heading,
        )
    else:
        raise ScenarioError(f"unknown scenario type {kind!r}")

    scalars.pop("seed", None)  # accepted but the CLI owns seeding
    if scalars:
        raise ScenarioError(f"unknown keys: {sorted(scalars)}")
    return scn


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {p}: {exc}") from None
    return parse_scenario(text, name=p.stem)


def builtin_scenario(name: str) -> Scenario:
    """Load one of the scenarios shipped with the package."""
    ref = resources.files("trisearch").joinpath("scenarios", f"{name}.scn")
    try:
        text = ref.read_text()
    except FileNotFoundError:
        raise ScenarioError(f"no builtin scenario named {name!r}") from None
    return parse_scenario(text, name=name)


def builtin_names() -> List[str]:
    base = resources.files("trisearch").joinpath("scenarios")
    return sorted(p.name[:-4] for p in base.iterdir() if p.name.endswith(".scn"))


def place_robots(
    scn: SearchScenario, rng: np.random.Generator, connect_slack: float = 2.0
) -> List[Tuple[float, float, float]]:
    """Sample initial poses: in free space, clear of the margin band, and with a
    connected communication graph (with slack so early motion cannot split it)."""
    if scn.poses is not None:
        for x, y, _ in scn.poses:
            if not contains_free(scn.workspace, (x, y)):
                raise ScenarioError(f"fixed pose ({x}, {y}) is not in free space")
        return list(scn.poses)
    x0, y0, x1, y1 = scn.workspace.bounds()
    need = scn.workspace.margin
    for _ in range(20000):
        pts = []
        while len(pts) < scn.robots:
            p = (rng.uniform(x0, x1), rng.uniform(y0, y1))
            if not contains_free(scn.workspace, p):
                continue
            if clearance(scn.workspace, p) < need:
                continue
            if any(math.hypot(p[0] - q[0], p[1] - q[1]) < 1.0 for q in pts):
                continue
            pts.append(p)
        graph = build_graph(pts, max(scn.r_c - connect_slack, scn.r_c * 0.5))
        if len(components(graph)) == 1:
            return [(p[0], p[1], rng.uniform(-math.pi, math.pi)) for p in pts]
    raise ScenarioError("could not place a connected team; check arena/r_c")
