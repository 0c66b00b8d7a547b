"""Scenario harness: endpoint metrics, the brute-force funnel-lane oracle and
batch execution of teach/repeat scenarios."""

from __future__ import annotations

import math
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
import yaml

from .control_standard import inside_funnel
from .control_sloped import SlopedParams
from .control_standard import StandardParams
from .errors import ConfigError, EmptyMatchError
from .features import Keyframe, MatchSet, NoiseModel, VisualPath, match
from .geometry import CameraModel, MotionCommand, Pose, World, visible_set, world_from_dict
from .navigate import NavigatorConfig, RunTrace, navigate
from .teach import TeachScript, record

__all__ = [
    "accuracy",
    "repeatability",
    "GridSpec",
    "grid_poses",
    "funnel_oracle",
    "controller_inside_grid",
    "Scenario",
    "MetricsReport",
    "run_scenario",
    "load_scenario",
    "scenario_from_dict",
]


def accuracy(points, goal) -> float:
    """RMS Euclidean distance of endpoint positions to the goal position."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("accuracy needs at least one point")
    d = pts - np.asarray(goal, dtype=float)
    return float(np.sqrt(np.mean(np.sum(d * d, axis=1))))


def repeatability(points) -> float:
    """RMS Euclidean distance of endpoint positions to their own mean."""
    pts = np.asarray(points, dtype=float)
    if pts.size == 0:
        raise ValueError("repeatability needs at least one point")
    d = pts - pts.mean(axis=0)
    return float(np.sqrt(np.mean(np.sum(d * d, axis=1))))


# --- funnel-lane oracle ------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    x0: float
    x1: float
    nx: int
    y0: float
    y1: float
    ny: int


def grid_poses(grid: GridSpec, theta: float) -> list[Pose]:
    """All grid positions at a shared heading, row-major."""
    xs = np.linspace(grid.x0, grid.x1, grid.nx)
    ys = np.linspace(grid.y0, grid.y1, grid.ny)
    return [Pose(float(x), float(y), theta) for y in ys for x in xs]


def funnel_oracle(kf: Keyframe, world: World, cam: CameraModel, grid: GridSpec) -> list[bool]:
    """Ground-truth membership in the combined funnel lane, by brute force.

    Works directly on world geometry (lateral/depth ratios), independent of
    the projection and voting code it is used to check.  A pose is inside iff
    every keyframe landmark is visible from it and satisfies both per-feature
    constraints, strictly.
    """
    lms = {lm.id: lm for lm in world.landmarks}
    feats = [(lms[i], u_j) for i, u_j in sorted(kf.observations.items())]
    out = []
    for pose in grid_poses(grid, kf.pose_truth.theta):
        c, s = math.cos(pose.theta), math.sin(pose.theta)
        inside = True
        for lm, u_j in feats:
            dx, dy = lm.x - pose.x, lm.y - pose.y
            depth = dx * c + dy * s
            if depth < cam.min_depth:
                inside = False
                break
            lat_right = dx * s - dy * c
            if cam.focal_length * abs(lat_right) > cam.half_width * depth:
                inside = False  # outside the image border
                break
            # |u_c| < |u_j| as a ratio test, avoiding the projection routine
            if abs(lat_right) * cam.focal_length >= abs(u_j) * depth:
                inside = False
                break
            if lat_right * u_j < 0:
                inside = False
                break
        out.append(inside)
    return out


def controller_inside_grid(
    kf: Keyframe, world: World, cam: CameraModel, grid: GridSpec
) -> list[bool]:
    """The controller's own "inside combined funnel lane" verdict on each grid pose."""
    quiet = NoiseModel()
    out = []
    for pose in grid_poses(grid, kf.pose_truth.theta):
        obs = visible_set(world, pose, cam)
        m = match(obs, kf, quiet)
        if len(m) < len(kf.observations):
            out.append(False)
            continue
        try:
            out.append(inside_funnel(m))
        except EmptyMatchError:
            out.append(False)
    return out


# --- scenarios ---------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    name: str
    world: World
    camera: CameraModel
    script: TeachScript
    repeat_start: Pose
    noise: NoiseModel
    navigator: NavigatorConfig
    runs: int = 1
    seed: int = 0
    tolerance: float = 0.3  # meters, per-run success bound on final error
    remove_landmarks: tuple[int, ...] = field(default=())
    min_teach_features: int = 4

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be at least 1")

    def repeat_world(self) -> World:
        """The world as seen in the repeat phase (dynamic scenarios drop landmarks)."""
        if self.remove_landmarks:
            return self.world.without(self.remove_landmarks)
        return self.world


@dataclass(frozen=True)
class MetricsReport:
    scenario: str
    controller: str
    accuracy: float
    repeatability: float
    final_points: tuple[tuple[float, float], ...]
    goal: tuple[float, float]
    outcomes: dict[str, int]
    n_within_tolerance: int
    traces: tuple[RunTrace, ...]

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "controller": self.controller,
            "accuracy": self.accuracy,
            "repeatability": self.repeatability,
            "final_points": [list(p) for p in self.final_points],
            "goal": list(self.goal),
            "outcomes": dict(sorted(self.outcomes.items())),
            "n_within_tolerance": self.n_within_tolerance,
            "runs": len(self.traces),
        }


def _max_workers() -> int:
    env = os.environ.get("FUNNEL_NAV_THREADS")
    if env:
        return max(1, int(env))
    return min(8, os.cpu_count() or 1)


def run_scenario(
    scenario: Scenario,
    controller: str | None = None,
    path: VisualPath | None = None,
) -> MetricsReport:
    """Teach once, repeat n times with seeded noise, and summarize endpoints.

    Failed runs contribute their stopping point to the metrics.  Run i uses
    seed scenario.seed + i, so both controllers see identical seed streams.
    """
    cfg = scenario.navigator
    if controller is not None:
        cfg = replace(cfg, controller=controller)
    if path is None:
        path = record(
            scenario.world, scenario.camera, scenario.script, scenario.min_teach_features
        )
    world = scenario.repeat_world()
    goal_pose = path.keyframes[-1].pose_truth
    goal = (goal_pose.x, goal_pose.y)

    def one(i: int) -> RunTrace:
        noise = replace(scenario.noise, seed=scenario.seed + i)
        return navigate(world, scenario.camera, path, scenario.repeat_start, cfg, noise)

    with ThreadPoolExecutor(max_workers=_max_workers()) as pool:
        traces = list(pool.map(one, range(scenario.runs)))

    points = tuple((t.final_pose.x, t.final_pose.y) for t in traces)
    errors = [math.hypot(p[0] - goal[0], p[1] - goal[1]) for p in points]
    outcomes = Counter(t.outcome for t in traces)
    n_ok = sum(
        1
        for t, e in zip(traces, errors)
        if t.outcome == "done" and e <= scenario.tolerance
    )
    return MetricsReport(
        scenario=scenario.name,
        controller=cfg.controller,
        accuracy=accuracy(points, goal),
        repeatability=repeatability(points),
        final_points=points,
        goal=goal,
        outcomes=dict(outcomes),
        n_within_tolerance=n_ok,
        traces=tuple(traces),
    )


# --- scenario config files ---------------------------------------------------

def _require(d: dict, key: str, ctx: str):
    if key not in d:
        raise ConfigError(f"{ctx}: missing required key {key!r}")
    return d[key]


def scenario_from_dict(d: dict) -> Scenario:
    """Build a Scenario from its YAML file representation."""
    try:
        name = str(_require(d, "name", "scenario"))
        world = world_from_dict(_require(d, "world", "scenario"))
        camera = CameraModel(**d.get("camera", {}))

        t = _require(d, "teach", "scenario")
        start = Pose(*_require(t, "start", "teach"))
        steps = tuple(
            (MotionCommand(float(s["v"]), float(s["omega"])), float(s["duration"]))
            for s in _require(t, "steps", "teach")
        )
        script = TeachScript(steps=steps, start_pose=start, dt=float(t.get("dt", 0.1)))

        r = d.get("repeat", {})
        repeat_start = Pose(*r.get("start", _require(t, "start", "teach")))
        noise = NoiseModel(**d.get("noise", {}))

        nav = dict(d.get("navigator", {}))
        ctrl = d.get("controllers", {})
        if "standard" in ctrl:
            nav["standard"] = StandardParams(**ctrl["standard"])
        if "sloped" in ctrl:
            nav["sloped"] = SlopedParams(**ctrl["sloped"])
        navigator = NavigatorConfig(**nav)

        return Scenario(
            name=name,
            world=world,
            camera=camera,
            script=script,
            repeat_start=repeat_start,
            noise=noise,
            navigator=navigator,
            runs=int(r.get("runs", 1)),
            seed=int(r.get("seed", 0)),
            tolerance=float(r.get("tolerance", 0.3)),
            remove_landmarks=tuple(r.get("remove_landmarks", [])),
            min_teach_features=int(t.get("min_features", 4)),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"scenario: {e}") from e


def load_scenario(path) -> Scenario:
    """Parse a scenario YAML file; parse errors carry the offending line."""
    with open(path) as fh:
        try:
            d = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            where = f" at line {mark.line + 1}" if mark else ""
            raise ConfigError(f"{path}: YAML parse error{where}: {e}") from e
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return scenario_from_dict(d)
