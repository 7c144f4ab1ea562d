"""Scenario and trajectory files, and the plan pipeline that ties modules together.

Scenario files are line oriented::

    # ddplan scenario
    # units: length m, speed m/s, u_max m/s^2, c_d 1/m
    inflation 0.3
    start 0 0
    goal 10 0.5
    u_max 1
    c_d 0.1
    v_start 0          (optional, default 0)
    v_end 0            (optional, default 0)
    obstacle x1 y1 x2 y2 x3 y3 ...

Blank lines and ``#`` comments are ignored.
"""

from __future__ import annotations

import hashlib
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import PlannerError
from .geometry import InflatedObstacle, Polygon, inflate_polygon, obstacles_overlap
from .roadmap import PlannedPath, Roadmap, attach_terminals, build_roadmap, ellipse_filter, kappa_m, shortest_path
from .velocity import DynParams, SpeedProfile, Trajectory, sample_trajectory, solve_terminal_speeds

log = logging.getLogger(__name__)

TRAJECTORY_COLUMNS = ("t", "x", "y", "vx", "vy", "ux", "uy", "gamma")


class ScenarioError(PlannerError):
    code = "invalid-scenario"


def fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")  # +0.0 folds -0.0 into 0


@dataclass(frozen=True)
class Scenario:
    obstacles: Tuple[Polygon, ...]
    inflation: float
    start: Tuple[float, float]
    goal: Tuple[float, float]
    u_max: float = 1.0
    c_d: float = 0.1
    v_start: float = 0.0
    v_end: float = 0.0

    @property
    def params(self) -> DynParams:
        return DynParams(self.u_max, self.c_d)

    def inflated(self) -> List[InflatedObstacle]:
        return [inflate_polygon(p, self.inflation) for p in self.obstacles]

    def to_text(self) -> str:
        lines = [
            "# ddplan scenario",
            "# units: length m, speed m/s, u_max m/s^2, c_d 1/m",
            f"inflation {fmt(self.inflation)}",
            f"start {fmt(self.start[0])} {fmt(self.start[1])}",
            f"goal {fmt(self.goal[0])} {fmt(self.goal[1])}",
            f"u_max {fmt(self.u_max)}",
            f"c_d {fmt(self.c_d)}",
            f"v_start {fmt(self.v_start)}",
            f"v_end {fmt(self.v_end)}",
        ]
        for p in self.obstacles:
            lines.append("obstacle " + " ".join(f"{fmt(x)} {fmt(y)}" for x, y in p.vertices))
        return "\n".join(lines) + "\n"

    def sha256(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()


_SCALAR_KEYS = {"inflation", "u_max", "c_d", "v_start", "v_end"}
_POINT_KEYS = {"start", "goal"}


def _float(tok: str, lineno: int, key: str) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise ScenarioError(f"line {lineno}: field '{key}': cannot parse {tok!r} as a number",
                            line=lineno, field=key) from None
    if not math.isfinite(x):
        raise ScenarioError(f"line {lineno}: field '{key}': value must be finite", line=lineno, field=key)
    return x


def parse_scenario(text: str) -> Scenario:
    values: Dict[str, object] = {}
    obstacles: List[Polygon] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *toks = line.split()
        if key in values:
            raise ScenarioError(f"line {lineno}: duplicate field '{key}'", line=lineno, field=key)
        if key in _SCALAR_KEYS:
            if len(toks) != 1:
                raise ScenarioError(f"line {lineno}: field '{key}' expects 1 value, got {len(toks)}",
                                    line=lineno, field=key)
            values[key] = _float(toks[0], lineno, key)
        elif key in _POINT_KEYS:
            if len(toks) != 2:
                raise ScenarioError(f"line {lineno}: field '{key}' expects 2 values, got {len(toks)}",
                                    line=lineno, field=key)
            values[key] = (_float(toks[0], lineno, key), _float(toks[1], lineno, key))
        elif key == "obstacle":
            if len(toks) < 6 or len(toks) % 2:
                raise ScenarioError(f"line {lineno}: field 'obstacle' needs an even number (>= 6) of coordinates",
                                    line=lineno, field=key)
            xs = [_float(t, lineno, key) for t in toks]
            try:
                obstacles.append(Polygon(tuple(zip(xs[0::2], xs[1::2]))))
            except PlannerError as exc:
                raise ScenarioError(f"line {lineno}: field 'obstacle': {exc}", line=lineno, field=key) from None
        else:
            raise ScenarioError(f"line {lineno}: unknown field '{key}'", line=lineno, field=key)
    for key in ("inflation", "start", "goal", "u_max", "c_d"):
        if key not in values:
            raise ScenarioError(f"missing required field '{key}'", field=key)
    for key in ("inflation", "u_max", "c_d"):
        if not values[key] > 0:
            raise ScenarioError(f"field '{key}' must be positive", field=key)
    sc = Scenario(tuple(obstacles), values["inflation"], values["start"], values["goal"],
                  values["u_max"], values["c_d"], values.get("v_start", 0.0), values.get("v_end", 0.0))
    validate_scenario(sc)
    return sc


def validate_scenario(sc: Scenario) -> None:
    """Raise ScenarioError unless obstacles are disjoint and terminals free."""
    inflated = sc.inflated()
    for i in range(len(inflated)):
        for j in range(i + 1, len(inflated)):
            if obstacles_overlap(inflated[i], inflated[j]):
                raise ScenarioError(f"obstacles {i} and {j} overlap after inflation", field="obstacle")
        for name, q in (("start", sc.start), ("goal", sc.goal)):
            if inflated[i].contains(q):
                raise ScenarioError(f"{name} point lies inside inflated obstacle {i}", field=name)
    vbar = sc.params.v_bar
    for name, v in (("v_start", sc.v_start), ("v_end", sc.v_end)):
        if not 0 <= v < vbar:
            raise ScenarioError(f"{name} must lie in [0, {vbar}) (the drag speed limit)", field=name)


def load_scenario(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# ---------------------------------------------------------------------------
# pipeline


@dataclass
class PlanResult:
    scenario: Scenario
    obstacles: List[InflatedObstacle]
    roadmap_full: Roadmap
    roadmap: Roadmap
    path: PlannedPath
    profile: SpeedProfile
    trajectory: Trajectory
    kappa: float
    dt: float
    filtered: bool
    timings: Dict[str, float] = field(default_factory=dict)

    @property
    def total_time(self) -> float:
        return self.profile.total_time


def plan_scenario(sc: Scenario, dt: float = 1e-3, use_filter: bool = True) -> PlanResult:
    timings = {}
    t0 = time.perf_counter()
    obstacles = sc.inflated()
    rm_full = attach_terminals(build_roadmap(obstacles), sc.start, sc.goal)
    rm = ellipse_filter(rm_full, obstacles, sc.start, sc.goal) if use_filter else rm_full
    timings["roadmap"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    path = shortest_path(rm, sc.start, sc.goal)
    timings["search"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    params = sc.params
    profile = solve_terminal_speeds(path, sc.v_start, sc.v_end, params)
    traj = sample_trajectory(path, profile, params, dt)
    timings["velocity"] = time.perf_counter() - t0
    return PlanResult(sc, obstacles, rm_full, rm, path, profile, traj, kappa_m(obstacles), dt, use_filter, timings)


# ---------------------------------------------------------------------------
# trajectory files


@dataclass
class TrajectoryFile:
    metadata: Dict[str, str]
    data: np.ndarray

    def as_trajectory(self) -> Trajectory:
        d = self.data
        return Trajectory(d[:, 0], d[:, 1:3], d[:, 3:5], d[:, 5:7], d[:, 7],
                          np.hypot(d[:, 3], d[:, 4]), np.zeros(len(d), dtype=int))


def trajectory_text(result: PlanResult) -> str:
    sc = result.scenario
    tr = result.trajectory
    meta = [
        ("format", "ddplan trajectory"),
        ("units", "t s, x y m, vx vy m/s, ux uy m/s^2, gamma m"),
        ("scenario_sha256", sc.sha256()),
        ("u_max", fmt(sc.u_max)),
        ("c_d", fmt(sc.c_d)),
        ("v_start", fmt(sc.v_start)),
        ("v_end", fmt(sc.v_end)),
        ("dt", fmt(result.dt)),
        ("filter", "on" if result.filtered else "off"),
        ("total_time", fmt(result.total_time)),
        ("path_length", fmt(result.path.total_length)),
        ("samples", str(len(tr))),
    ]
    out = [f"# {k}: {v}" for k, v in meta]
    out.append(",".join(TRAJECTORY_COLUMNS))
    cols = np.column_stack([tr.t, tr.position, tr.velocity, tr.control, tr.gamma])
    out.extend(",".join(fmt(x) for x in row) for row in cols)
    return "\n".join(out) + "\n"


def parse_trajectory(text: str) -> TrajectoryFile:
    meta: Dict[str, str] = {}
    rows = []
    header_seen = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.startswith("#"):
            if ":" in line:
                k, v = line[1:].split(":", 1)
                meta[k.strip()] = v.strip()
            continue
        if not line.strip():
            continue
        if not header_seen:
            if tuple(line.strip().split(",")) != TRAJECTORY_COLUMNS:
                raise ScenarioError(f"line {lineno}: expected header {','.join(TRAJECTORY_COLUMNS)}", line=lineno)
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != len(TRAJECTORY_COLUMNS):
            raise ScenarioError(f"line {lineno}: expected {len(TRAJECTORY_COLUMNS)} columns", line=lineno)
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ScenarioError(f"line {lineno}: non-numeric value", line=lineno) from None
    if not rows:
        raise ScenarioError("trajectory has no samples")
    return TrajectoryFile(meta, np.array(rows))


def load_trajectory(path) -> TrajectoryFile:
    with open(path, encoding="utf-8") as fh:
        return parse_trajectory(fh.read())
