"""
Strategies - observations, the truthful strategy and scripted deviations.
"""

from .base import (
    TRUTHFUL,
    Observation,
    ObservationPhase,
    Strategy,
    StrategyProfile,
    StrategySet,
    TruthfulStrategy,
    truthful,
)
from .script import Script, parse_script, tokenize
from .scripted import ScriptedStrategy, compile_script

__all__ = [
    "TRUTHFUL",
    "Observation",
    "ObservationPhase",
    "Script",
    "ScriptedStrategy",
    "Strategy",
    "StrategyProfile",
    "StrategySet",
    "TruthfulStrategy",
    "compile_script",
    "parse_script",
    "tokenize",
    "truthful",
]
