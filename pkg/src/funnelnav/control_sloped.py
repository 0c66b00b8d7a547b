"""Sloped funnel-lane controller with adaptive radius of rotation.

All matched features are summarized by one lane over side medians plus two
slopes: a pitch slope (one minus the spread ratio, large when far from the
keyframe) that sets the turning radius, and a roll slope (normalized median
offsets, summed over sides) that steers inside the lane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSpreadError, EmptyMatchError
from .features import MatchSet, split_sides, std_ratio
from .geometry import MotionCommand

__all__ = [
    "SlopedParams",
    "SlopedState",
    "compute_s_y",
    "compute_s_x",
    "radius_policy",
    "evaluate_state",
    "sloped_command",
    "inside_sloped",
]


@dataclass(frozen=True)
class SlopedParams:
    v_max: float
    omega_max: float
    sx_epsilon: float = 0.05  # dead-band around roll slope zero
    norm_floor: float = 5.0  # pixels; floors the roll normalizer near image center
    v_floor_frac: float = 0.05  # fraction of v_max kept while turning, for liveness

    def __post_init__(self):
        if min(self.v_max, self.omega_max, self.sx_epsilon, self.norm_floor) <= 0:
            raise ValueError("all sloped parameters must be strictly positive")
        if not 0.0 <= self.v_floor_frac < 1.0:
            raise ValueError("v_floor_frac must lie in [0, 1)")


@dataclass(frozen=True)
class SlopedState:
    """Per-tick controller internals, emitted for tracing only."""

    s_x: float
    s_y: float | None  # None when the spread ratio is unavailable
    mu_l_c: float | None
    mu_l_j: float | None
    mu_r_c: float | None
    mu_r_j: float | None
    constraints: tuple[bool, bool, bool, bool]

    @property
    def inside(self) -> bool:
        return all(self.constraints)


def compute_s_y(m: MatchSet) -> float:
    """Pitch slope: 1 - spread ratio; positive before the keyframe, 0 at it."""
    return 1.0 - std_ratio(m)


def _medians(pairs):
    if not pairs:
        return None, None
    mu_c = float(np.median([p[1] for p in pairs]))
    mu_j = float(np.median([p[2] for p in pairs]))
    return mu_c, mu_j


def compute_s_x(m: MatchSet, p: SlopedParams) -> float:
    """Roll slope: sum over sides of the normalized median offset.

    Each side contributes (median_current - median_keyframe) divided by the
    keyframe median magnitude (floored at norm_floor); an absent side
    contributes 0.
    """
    if len(m) == 0:
        raise EmptyMatchError("compute_s_x on empty match set")
    left, right = split_sides(m)
    s = 0.0
    for pairs in (left, right):
        mu_c, mu_j = _medians(pairs)
        if mu_c is None:
            continue
        s += (mu_c - mu_j) / max(abs(mu_j), p.norm_floor)
    return s


def radius_policy(s_y: float, p: SlopedParams) -> tuple[float, float]:
    """Map the pitch slope to (v, |omega|).

    Linear with clamping: turning radius v/|omega| shrinks with the pitch
    slope, approaching rotation in place at zero.  A small velocity floor
    keeps the robot creeping forward; a pure in-place rotation can otherwise
    lock up when the lateral offset never changes.
    """
    v = p.v_max * max(min(max(s_y, 0.0), 1.0), p.v_floor_frac)
    return v, p.omega_max


def evaluate_state(m: MatchSet, p: SlopedParams) -> SlopedState:
    """Slopes, side medians and the four lane constraints for one match set.

    Constraint order: right magnitude, left magnitude, right sign, left sign.
    A missing side leaves its two constraints satisfied; a zero coordinate
    matches either sign.
    """
    if len(m) == 0:
        raise EmptyMatchError("evaluate_state on empty match set")
    left, right = split_sides(m)
    mu_l_c, mu_l_j = _medians(left)
    mu_r_c, mu_r_j = _medians(right)

    # non-strict at the boundary: landing exactly on the keyframe must read
    # as inside, so the controller drives through it and the switching
    # statistic can cross 1
    c1 = mu_r_c is None or abs(mu_r_c) <= abs(mu_r_j)
    c2 = mu_l_c is None or abs(mu_l_c) <= abs(mu_l_j)
    c3 = mu_r_c is None or mu_r_c * mu_r_j >= 0
    c4 = mu_l_c is None or mu_l_c * mu_l_j >= 0

    try:
        s_y = compute_s_y(m)
    except DegenerateSpreadError:
        s_y = None

    return SlopedState(
        s_x=compute_s_x(m, p),
        s_y=s_y,
        mu_l_c=mu_l_c,
        mu_l_j=mu_l_j,
        mu_r_c=mu_r_c,
        mu_r_j=mu_r_j,
        constraints=(c1, c2, c3, c4),
    )


def _turn(direction: int, s_y: float | None, p: SlopedParams) -> MotionCommand:
    # direction +1 = left (CCW), -1 = right
    if s_y is None:
        return MotionCommand(0.0, direction * p.omega_max)
    v, omega_mag = radius_policy(s_y, p)
    return MotionCommand(v, direction * omega_mag)


def sloped_command(m: MatchSet, p: SlopedParams) -> tuple[MotionCommand, SlopedState]:
    """One control tick: command plus the controller state used to produce it.

    Inside the lane the roll slope steers (dead-band -> forward at full speed);
    outside, a violated right-side constraint means the robot left the lane on
    its left, so it turns right, and vice versa.  All turns use the pitch-slope
    radius policy.
    """
    st = evaluate_state(m, p)
    c1, c2, c3, c4 = st.constraints
    if st.inside:
        # without a usable spread ratio there is no radius to modulate;
        # inside the lane the conservative fallback is plain forward motion
        if abs(st.s_x) <= p.sx_epsilon or st.s_y is None:
            return MotionCommand(p.v_max, 0.0), st
        if st.s_x < 0:
            return _turn(+1, st.s_y, p), st
        return _turn(-1, st.s_y, p), st
    drifted_left = (not c1) or (not c4)
    drifted_right = (not c2) or (not c3)
    if drifted_left and drifted_right:
        # both sides complain (large heading offsets shortly after a keyframe
        # switch do this); the roll slope is the reliable arbiter then
        return _turn(+1 if st.s_x < 0 else -1, st.s_y, p), st
    if drifted_left:
        return _turn(-1, st.s_y, p), st
    return _turn(+1, st.s_y, p), st


def inside_sloped(m: MatchSet, p: SlopedParams) -> bool:
    """True when all four median constraints hold."""
    return evaluate_state(m, p).inside
