"""Keyframes, visual paths, simulated feature matching and match statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpreadError, EmptyMatchError, InvalidPathError
from .geometry import Pose

__all__ = [
    "Keyframe",
    "VisualPath",
    "MatchSet",
    "NoiseModel",
    "match",
    "std_ratio",
    "median_distance",
    "mse",
    "split_sides",
    "save_visual_path",
    "load_visual_path",
]


@dataclass(frozen=True)
class Keyframe:
    """A snapshot of landmark observations (id -> image coordinate) at a teach pose.

    pose_truth is kept for evaluation and oracles only; controllers never read it.
    """

    index: int
    pose_truth: Pose
    observations: dict[int, float]

    def __post_init__(self):
        if not self.observations:
            raise InvalidPathError(f"keyframe {self.index} has no observations")


@dataclass(frozen=True)
class VisualPath:
    """Ordered keyframes plus the features tracked across each segment.

    segment_features[k] maps a landmark id to its coordinates at the start and
    end keyframes of segment k.
    """

    keyframes: tuple[Keyframe, ...]
    segment_features: tuple[dict[int, tuple[float, float]], ...]

    def __post_init__(self):
        if len(self.keyframes) < 2:
            raise InvalidPathError("a visual path needs at least 2 keyframes")
        if len(self.segment_features) != len(self.keyframes) - 1:
            raise InvalidPathError("segment_features must have one entry per segment")
        for a, b in zip(self.keyframes, self.keyframes[1:]):
            if not set(a.observations) & set(b.observations):
                raise InvalidPathError(
                    f"keyframes {a.index} and {b.index} share no observation"
                )


@dataclass(frozen=True)
class NoiseModel:
    """Per-run feature noise: matching dropout and additive pixel noise.

    Pixel noise is Gaussian truncated at +/-3 sigma so a single draw can never
    teleport a feature across the image.
    """

    dropout_prob: float = 0.0
    pixel_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.dropout_prob < 1.0):
            raise ValueError("dropout_prob must be in [0, 1)")
        if self.pixel_sigma < 0:
            raise ValueError("pixel_sigma must be non-negative")

    def make_rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


@dataclass(frozen=True)
class MatchSet:
    """Feature correspondences between a current image (u_current) and a keyframe
    image (u_keyframe)."""

    pairs: tuple[tuple[int, float, float], ...] = field(default=())

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def ids(self) -> tuple[int, ...]:
        return tuple(p[0] for p in self.pairs)

    @property
    def u_current(self) -> np.ndarray:
        return np.array([p[1] for p in self.pairs], dtype=float)

    @property
    def u_keyframe(self) -> np.ndarray:
        return np.array([p[2] for p in self.pairs], dtype=float)

    def swapped(self) -> "MatchSet":
        return MatchSet(tuple((i, b, a) for i, a, b in self.pairs))


def perturb(u: float, noise: NoiseModel, rng: np.random.Generator) -> float:
    """Apply truncated Gaussian pixel noise to one coordinate."""
    if noise.pixel_sigma == 0.0:
        return u
    d = rng.normal(0.0, noise.pixel_sigma)
    lim = 3.0 * noise.pixel_sigma
    return u + float(np.clip(d, -lim, lim))


def match(
    current_obs: dict[int, float],
    kf: Keyframe,
    noise: NoiseModel,
    rng: np.random.Generator | None = None,
) -> MatchSet:
    """Simulated feature matching of the current image against a keyframe.

    Common ids survive with probability 1 - dropout_prob; surviving current
    coordinates get pixel noise, keyframe coordinates are taken verbatim.
    An empty result is a legal value (consumed as "lost" upstream).
    """
    if rng is None:
        rng = noise.make_rng()
    common = sorted(set(current_obs) & set(kf.observations))
    pairs = []
    for i in common:
        if noise.dropout_prob > 0.0 and rng.random() < noise.dropout_prob:
            continue
        pairs.append((i, perturb(current_obs[i], noise, rng), kf.observations[i]))
    return MatchSet(tuple(pairs))


def std_ratio(m: MatchSet) -> float:
    """Ratio of current to keyframe population standard deviation of coordinates.

    Crosses 1 when the robot passes the keyframe plane.
    """
    if len(m) < 2:
        raise DegenerateSpreadError("std_ratio needs at least 2 matched pairs")
    sb = float(np.std(m.u_keyframe))
    if sb == 0.0:
        raise DegenerateSpreadError("keyframe coordinates have zero spread")
    return float(np.std(m.u_current)) / sb


def median_distance(m: MatchSet) -> float:
    """Absolute difference between the coordinate medians of the two images."""
    if len(m) == 0:
        raise EmptyMatchError("median_distance on empty match set")
    return abs(float(np.median(m.u_current)) - float(np.median(m.u_keyframe)))


def mse(m: MatchSet) -> float:
    """Mean squared coordinate error; diagnostic trace channel only."""
    if len(m) == 0:
        raise EmptyMatchError("mse on empty match set")
    d = m.u_current - m.u_keyframe
    return float(np.mean(d * d))


def split_sides(m: MatchSet):
    """Partition pairs by the sign of the keyframe coordinate.

    Returns (left_pairs, right_pairs); a keyframe coordinate of exactly 0
    counts as right-side.
    """
    left = tuple(p for p in m.pairs if p[2] < 0)
    right = tuple(p for p in m.pairs if p[2] >= 0)
    return left, right


# --- visual-path file round-trip (JSON) -------------------------------------

def _path_to_dict(path: VisualPath) -> dict:
    return {
        "keyframes": [
            {
                "index": kf.index,
                "pose_truth": [kf.pose_truth.x, kf.pose_truth.y, kf.pose_truth.theta],
                "observations": {str(i): u for i, u in kf.observations.items()},
            }
            for kf in path.keyframes
        ],
        "segment_features": [
            {str(i): [ua, ub] for i, (ua, ub) in seg.items()}
            for seg in path.segment_features
        ],
    }


def _path_from_dict(d: dict) -> VisualPath:
    kfs = tuple(
        Keyframe(
            index=int(k["index"]),
            pose_truth=Pose(*k["pose_truth"]),
            observations={int(i): float(u) for i, u in k["observations"].items()},
        )
        for k in d["keyframes"]
    )
    segs = tuple(
        {int(i): (float(v[0]), float(v[1])) for i, v in seg.items()}
        for seg in d["segment_features"]
    )
    return VisualPath(keyframes=kfs, segment_features=segs)


def save_visual_path(path: VisualPath, file) -> None:
    """Write a visual path as JSON; round-trips losslessly through load_visual_path."""
    with open(file, "w") as fh:
        json.dump(_path_to_dict(path), fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_visual_path(file) -> VisualPath:
    with open(file) as fh:
        return _path_from_dict(json.load(fh))
