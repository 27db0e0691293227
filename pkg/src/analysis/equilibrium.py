"""
Nash Checking

A profile passes when no agent gains by deviating. Two deviation spaces are
checked for every agent:
- every behavioral strategy within the agent's report and decision
  alphabets (exact best-response value by backward induction)
- every strategy of the agent's registered StrategySet (named witnesses)

The verdict records which spaces were checked.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Tuple

import structlog

from src.core.game_spec import GameSpec
from src.mechanisms.base import Mechanism
from src.orchestrator.outcome import PayoffVector
from src.orchestrator.play import DEFAULT_MAX_PATHS, expected_payoffs
from src.strategies.base import StrategyProfile, StrategySet

from .best_response import DEFAULT_MAX_NODES, Objective, best_response_value

logger = structlog.get_logger()

BEHAVIORAL = "behavioral best response"


@dataclass(frozen=True)
class DeviationWitness:
    """A profitable deviation of one agent."""
    agent: str
    deviation: str
    baseline: Fraction
    value: Fraction

    @property
    def gain(self) -> Fraction:
        return self.value - self.baseline

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "deviation": self.deviation,
            "baseline": str(self.baseline),
            "value": str(self.value),
            "gain": str(self.gain),
        }


@dataclass(frozen=True)
class NashVerdict:
    """
    Result of a Nash check.

    `is_nash` means no profitable deviation was found within `scope`.
    """
    profile: Tuple[Tuple[str, str], ...]
    payoffs: PayoffVector
    witnesses: Tuple[DeviationWitness, ...]
    scope: Tuple[str, ...]

    @property
    def is_nash(self) -> bool:
        return not self.witnesses

    def to_dict(self) -> dict:
        return {
            "profile": dict(self.profile),
            "is_nash": self.is_nash,
            "payoffs": self.payoffs.to_dict(),
            "witnesses": [witness.to_dict() for witness in self.witnesses],
            "scope": list(self.scope),
        }


def nash_check(
    spec: GameSpec,
    mechanism: Mechanism,
    profile: StrategyProfile,
    sets: Optional[Mapping[str, StrategySet]] = None,
    agents: Optional[Sequence[str]] = None,
    behavioral: bool = True,
    max_paths: int = DEFAULT_MAX_PATHS,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> NashVerdict:
    """
    Check a behavioral profile for profitable unilateral deviations.

    Args:
        spec: Validated game
        mechanism: Transfer rule
        profile: Profile under test
        sets: Registered strategies per agent (named witnesses)
        agents: Agents to check (all by default)
        behavioral: Also check all behavioral deviations by backward induction

    Example:
        verdict = nash_check(spec, NoTransfers(spec), profile)
        verdict.is_nash
    """
    sets = sets or {}
    agents = tuple(agents) if agents is not None else tuple(spec.agents)
    payoffs = expected_payoffs(spec, mechanism, profile, max_paths)
    witnesses = []
    scope = []
    if behavioral:
        scope.append("all behavioral deviations within the report and decision alphabets")
    if sets:
        scope.append("registered strategies of " + ", ".join(sorted(sets)))

    for agent in agents:
        baseline = payoffs.of(agent)
        if behavioral:
            value = best_response_value(spec, mechanism, agent, profile, Objective.MAX, max_nodes)
            if value > baseline:
                witnesses.append(DeviationWitness(agent, BEHAVIORAL, baseline, value))
        strategy_set = sets.get(agent)
        if strategy_set is None:
            continue
        for strategy in strategy_set.strategies:
            if strategy.name == profile.for_agent(agent).name:
                continue
            value = expected_payoffs(spec, mechanism, profile.with_strategy(strategy), max_paths).of(agent)
            if value > baseline:
                witnesses.append(DeviationWitness(agent, strategy.name, baseline, value))

    verdict = NashVerdict(
        tuple(profile.names.items()), payoffs, tuple(witnesses), tuple(scope)
    )
    logger.info(
        "nash_checked",
        scenario=spec.name,
        mechanism=mechanism.name,
        profile=profile.describe(),
        is_nash=verdict.is_nash,
        witnesses=len(verdict.witnesses),
    )
    return verdict
