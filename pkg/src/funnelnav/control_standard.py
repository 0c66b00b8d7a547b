"""Baseline funnel-lane controller: per-feature constraints with majority vote.

Each matched feature votes forward/left/right from two qualitative
constraints on its image coordinates; the majority wins and the robot turns
at a fixed preset radius.  The command's rotational speed is always one of
{-omega0, 0, +omega0}: the constant-radius limitation is structural.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .errors import EmptyMatchError
from .features import MatchSet
from .geometry import MotionCommand

__all__ = ["StandardParams", "SteerDecision", "feature_vote", "decide", "standard_command", "inside_funnel"]

FORWARD = "forward"
LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True)
class StandardParams:
    """Fixed translational and rotational speeds for the whole run."""

    v0: float
    omega0: float

    def __post_init__(self):
        if self.v0 <= 0 or self.omega0 <= 0:
            raise ValueError("v0 and omega0 must be strictly positive")


@dataclass(frozen=True)
class SteerDecision:
    direction: str
    votes: tuple[int, int, int]  # (forward, left, right)


def feature_vote(u_c: float, u_j: float) -> str:
    """One feature's steering vote.

    For a right-side keyframe feature (u_j >= 0): magnitude no longer smaller
    -> right turn; sign flipped -> left turn; otherwise forward.  Left-side
    features reverse the turn directions.  A zero coordinate matches either
    sign.
    """
    if u_j >= 0:
        if abs(u_c) >= abs(u_j):
            return RIGHT
        if u_c * u_j < 0:
            return LEFT
        return FORWARD
    if abs(u_c) >= abs(u_j):
        return LEFT
    if u_c * u_j < 0:
        return RIGHT
    return FORWARD


def decide(m: MatchSet) -> SteerDecision:
    """Majority vote over all matched features; ties break forward, then left."""
    if len(m) == 0:
        raise EmptyMatchError("standard controller needs at least one match")
    tally = Counter(feature_vote(ua, ub) for _, ua, ub in m.pairs)
    votes = (tally[FORWARD], tally[LEFT], tally[RIGHT])
    best = max(votes)
    for direction, n in zip((FORWARD, LEFT, RIGHT), votes):
        if n == best:
            return SteerDecision(direction, votes)
    raise AssertionError("unreachable")


def standard_command(m: MatchSet, p: StandardParams) -> MotionCommand:
    """MotionCommand for the majority direction at the preset speeds."""
    d = decide(m)
    if d.direction == FORWARD:
        return MotionCommand(p.v0, 0.0)
    if d.direction == LEFT:
        return MotionCommand(p.v0, p.omega0)
    return MotionCommand(p.v0, -p.omega0)


def inside_funnel(m: MatchSet) -> bool:
    """True when every feature satisfies both of its funnel constraints."""
    if len(m) == 0:
        raise EmptyMatchError("inside_funnel on empty match set")
    return all(feature_vote(ua, ub) == FORWARD for _, ua, ub in m.pairs)
