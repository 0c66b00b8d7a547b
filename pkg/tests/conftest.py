"""Shared test fixtures and helpers."""

from __future__ import annotations

from pathlib import Path

import pytest

from funnelnav.features import MatchSet

PKG_ROOT = Path(__file__).resolve().parents[1]
SCENARIO_DIR = PKG_ROOT / "scenarios"

ALL_SCENARIOS = sorted(SCENARIO_DIR.glob("*.yaml"))


def ms(*pairs) -> MatchSet:
    """Build a MatchSet from (id, u_current, u_keyframe) tuples."""
    return MatchSet(tuple(pairs))


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    return SCENARIO_DIR
