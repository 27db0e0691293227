"""
Play Orchestration

Enumerates the paths of play of a strategy profile under a mechanism and
aggregates exact expected payoffs.
"""

from .outcome import PayoffMeasure, PayoffVector, PlayPath
from .play import (
    DEFAULT_MAX_PATHS,
    PlayState,
    enumerate_paths,
    expected_payoffs,
    path_utilities,
    reachable_states,
    round_branches,
)
from .run_config import RunConfig

__all__ = [
    "DEFAULT_MAX_PATHS",
    "PayoffMeasure",
    "PayoffVector",
    "PlayPath",
    "PlayState",
    "RunConfig",
    "enumerate_paths",
    "expected_payoffs",
    "path_utilities",
    "reachable_states",
    "round_branches",
]
