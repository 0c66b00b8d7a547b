"""World model, 1-D pinhole projection and unicycle kinematics.

The camera looks along the robot heading; landmarks project onto a single
horizontal image axis.  Positive image coordinates are on the RIGHT side of
the image, negative on the left.  All functions here are pure and operate on
immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "Pose",
    "Landmark",
    "CameraModel",
    "World",
    "MotionCommand",
    "normalize_angle",
    "project",
    "visible_set",
    "step",
    "in_collision",
    "world_from_dict",
    "world_to_dict",
]

_TWO_PI = 2.0 * math.pi


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    a = math.remainder(a, _TWO_PI)
    if a <= -math.pi:
        a += _TWO_PI
    return a


@dataclass(frozen=True)
class Pose:
    """Planar robot pose: position in meters, heading in radians (CCW, 0 = +x)."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))


@dataclass(frozen=True)
class Landmark:
    """A fixed, identifiable world point."""

    id: int
    x: float
    y: float


@dataclass(frozen=True)
class CameraModel:
    """Forward-looking 1-D pinhole camera.

    The image spans [-half_width, +half_width] pixels; points closer than
    min_depth along the optical axis are not imaged.
    """

    focal_length: float = 277.0
    half_width: float = 160.0
    min_depth: float = 0.1

    def __post_init__(self):
        if self.focal_length <= 0 or self.half_width <= 0 or self.min_depth <= 0:
            raise ValueError("camera parameters must be strictly positive")


@dataclass(frozen=True)
class MotionCommand:
    """Commanded translational (m/s, >= 0) and rotational (rad/s, CCW+) speed."""

    v: float
    omega: float

    def __post_init__(self):
        if self.v < 0:
            raise ValueError("translational speed must be non-negative")


Rect = tuple[float, float, float, float]  # xmin, ymin, xmax, ymax


@dataclass(frozen=True)
class World:
    """A bounded plane with landmarks and optional collision-reporting obstacles.

    Obstacles never affect sensing; they only flag a run as collided.
    """

    landmarks: tuple[Landmark, ...]
    bounds: Rect
    obstacles: tuple[Rect, ...] = field(default=())

    def __post_init__(self):
        ids = [lm.id for lm in self.landmarks]
        if len(ids) != len(set(ids)):
            raise ValueError("landmark ids must be unique within a world")
        xmin, ymin, xmax, ymax = self.bounds
        for lm in self.landmarks:
            if not (xmin <= lm.x <= xmax and ymin <= lm.y <= ymax):
                raise ValueError(f"landmark {lm.id} outside world bounds")

    def without(self, ids) -> "World":
        """Copy of this world with the given landmark ids removed."""
        drop = set(ids)
        return World(
            landmarks=tuple(lm for lm in self.landmarks if lm.id not in drop),
            bounds=self.bounds,
            obstacles=self.obstacles,
        )


def project(landmark: Landmark, pose: Pose, cam: CameraModel):
    """Horizontal image coordinate of a landmark, or None if not visible.

    Positive coordinates mean the landmark appears on the right side of the
    image.  Returns None when the landmark is closer than min_depth or falls
    outside the image border.
    """
    dx = landmark.x - pose.x
    dy = landmark.y - pose.y
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    depth = dx * c + dy * s
    if depth < cam.min_depth:
        return None
    lat_left = -dx * s + dy * c
    u = cam.focal_length * (-lat_left) / depth
    if abs(u) > cam.half_width:
        return None
    return u


def visible_set(world: World, pose: Pose, cam: CameraModel) -> dict[int, float]:
    """Map of landmark id -> image coordinate for all currently visible landmarks."""
    out = {}
    for lm in world.landmarks:
        u = project(lm, pose, cam)
        if u is not None:
            out[lm.id] = u
    return out


def step(pose: Pose, cmd: MotionCommand, dt: float) -> Pose:
    """Advance a pose by one command interval using exact unicycle integration."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if abs(cmd.omega) < 1e-9:
        return Pose(
            pose.x + cmd.v * dt * math.cos(pose.theta),
            pose.y + cmd.v * dt * math.sin(pose.theta),
            pose.theta,
        )
    r = cmd.v / cmd.omega
    th1 = pose.theta + cmd.omega * dt
    return Pose(
        pose.x + r * (math.sin(th1) - math.sin(pose.theta)),
        pose.y - r * (math.cos(th1) - math.cos(pose.theta)),
        th1,
    )


def in_collision(world: World, pose: Pose) -> bool:
    """True when the robot position lies inside any obstacle rectangle."""
    for xmin, ymin, xmax, ymax in world.obstacles:
        if xmin <= pose.x <= xmax and ymin <= pose.y <= ymax:
            return True
    return False


def world_from_dict(d: dict) -> World:
    """Build a World from its file representation.

    Schema::

        bounds: [xmin, ymin, xmax, ymax]
        landmarks: [[id, x, y], ...]            # optional
        generated:                              # optional, ids auto-assigned
          - grid: {x0, x1, nx, y0, y1, ny}
          - ring: {cx, cy, radius, n, phase}    # phase optional, radians
          - line: {x0, y0, x1, y1, n}           # n points, endpoints included
        obstacles: [[xmin, ymin, xmax, ymax], ...]   # optional
    """
    from .errors import ConfigError

    try:
        bounds = tuple(float(v) for v in d["bounds"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"world: bad or missing bounds: {e}") from e
    if len(bounds) != 4:
        raise ConfigError("world: bounds must have 4 entries")

    landmarks = []
    for entry in d.get("landmarks", []):
        i, x, y = entry
        landmarks.append(Landmark(int(i), float(x), float(y)))
    next_id = max((lm.id for lm in landmarks), default=0) + 1
    for gen in d.get("generated", []):
        if "grid" in gen:
            g = gen["grid"]
            nx, ny = int(g["nx"]), int(g["ny"])
            for iy in range(ny):
                for ix in range(nx):
                    x = g["x0"] + (g["x1"] - g["x0"]) * (ix / (nx - 1) if nx > 1 else 0.0)
                    y = g["y0"] + (g["y1"] - g["y0"]) * (iy / (ny - 1) if ny > 1 else 0.0)
                    landmarks.append(Landmark(next_id, float(x), float(y)))
                    next_id += 1
        elif "ring" in gen:
            g = gen["ring"]
            n = int(g["n"])
            phase = float(g.get("phase", 0.0))
            for k in range(n):
                a = _TWO_PI * k / n + phase
                landmarks.append(
                    Landmark(
                        next_id,
                        float(g["cx"] + g["radius"] * math.cos(a)),
                        float(g["cy"] + g["radius"] * math.sin(a)),
                    )
                )
                next_id += 1
        elif "line" in gen:
            g = gen["line"]
            n = int(g["n"])
            for k in range(n):
                t = k / (n - 1) if n > 1 else 0.0
                landmarks.append(
                    Landmark(
                        next_id,
                        float(g["x0"] + (g["x1"] - g["x0"]) * t),
                        float(g["y0"] + (g["y1"] - g["y0"]) * t),
                    )
                )
                next_id += 1
        else:
            raise ConfigError(f"world: unknown generator {sorted(gen)}")

    obstacles = tuple(tuple(float(v) for v in r) for r in d.get("obstacles", []))
    try:
        return World(landmarks=tuple(landmarks), bounds=bounds, obstacles=obstacles)
    except ValueError as e:
        raise ConfigError(f"world: {e}") from e


def world_to_dict(world: World) -> dict:
    """Inverse of world_from_dict (generators are expanded to explicit landmarks)."""
    return {
        "bounds": list(world.bounds),
        "landmarks": [[lm.id, lm.x, lm.y] for lm in world.landmarks],
        "obstacles": [list(r) for r in world.obstacles],
    }
