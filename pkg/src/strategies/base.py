"""
Strategy Interface - observations, reporting strategies and profiles

An agent reporting in round t observes its own true types of rounds 0..t,
every public report of rounds 0..t-1, the public decisions and its own
private decisions so far, and the past true types of agents revealed to it.
When choosing its private decision it also sees the round-t reports and
its recommendation.

Design Pattern: Strategy (ABC with report/decide)

Tenet #5: Make Illegal States Unrepresentable
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Mapping, Optional, Tuple

from src.core.errors import UnreachableObservation, ValidationError
from src.core.game_spec import GameSpec
from src.core.types import PUBLIC_AGENT, Distribution

TRUTHFUL = "truthful"


class ObservationPhase(Enum):
    """What the agent is about to choose."""
    REPORT = "report"
    DECIDE = "decide"


@dataclass(frozen=True)
class Observation:
    """
    Information of one agent at one choice point.

    Attributes:
        agent: Observing agent
        round: Current round t
        phase: REPORT or DECIDE
        profile_agents: Agent order of report profiles (public agent first)
        own_types: Own true type labels, rounds 0..t
        reports: Reported profiles, rounds 0..t-1 (0..t when deciding)
        public_decisions: Public decisions, rounds 1..t-1
        own_private: Own private decisions, rounds 1..t-1
        revealed: (agent, true type labels of rounds 0..t-1) for revealed agents
        recommendation: Recommended private decision (DECIDE only)
    """
    agent: str
    round: int
    phase: ObservationPhase
    profile_agents: Tuple[str, ...]
    own_types: Tuple[str, ...]
    reports: Tuple[Tuple[str, ...], ...]
    public_decisions: Tuple[str, ...] = ()
    own_private: Tuple[str, ...] = ()
    revealed: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    recommendation: Optional[str] = None

    @property
    def current_type(self) -> str:
        return self.own_types[-1]

    def report_of(self, agent: str, round_index: int) -> str:
        """Public report of `agent` in a past round (or the current round when deciding)."""
        if agent not in self.profile_agents:
            raise ValidationError(f"Unknown agent {agent!r} in observation of {self.agent}")
        if not 0 <= round_index < len(self.reports):
            raise UnreachableObservation(
                f"{self.agent} cannot see round-{round_index} reports in round {self.round}",
                agent=self.agent,
                round=self.round,
            )
        return self.reports[round_index][self.profile_agents.index(agent)]

    def revealed_type(self, agent: str, round_index: int) -> Optional[str]:
        for name, history in self.revealed:
            if name == agent and 0 <= round_index < len(history):
                return history[round_index]
        return None

    def key(self) -> tuple:
        """Hashable identity of the observation."""
        return (
            self.agent,
            self.round,
            self.phase.value,
            self.own_types,
            self.reports,
            self.public_decisions,
            self.own_private,
            self.revealed,
            self.recommendation,
        )


class Strategy(ABC):
    """
    Base class for behavioral strategies.

    `report` returns a distribution over the round-t report alphabet;
    `decide` returns a distribution over the agent's private decisions and
    follows the recommendation unless overridden.
    """

    def __init__(self, agent: str, name: str):
        self.agent = agent
        self._name = name

    @property
    def name(self) -> str:
        return self._name

    @property
    def is_truthful(self) -> bool:
        return False

    @abstractmethod
    def report(self, spec: GameSpec, observation: Observation) -> Distribution:
        """Distribution over round-t reports."""

    def decide(self, spec: GameSpec, observation: Observation) -> Distribution:
        if observation.recommendation is None:
            raise UnreachableObservation(
                f"No recommendation available to {self.agent} in round {observation.round}",
                agent=self.agent,
            )
        return Distribution.point(observation.recommendation)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.agent!r}, {self.name!r})"


class TruthfulStrategy(Strategy):
    """Reports the current true type and follows the recommended private decision."""

    def __init__(self, agent: str, name: str = TRUTHFUL):
        super().__init__(agent, name)

    @property
    def is_truthful(self) -> bool:
        return True

    def report(self, spec: GameSpec, observation: Observation) -> Distribution:
        return Distribution.point(observation.current_type)


def truthful(spec: GameSpec, agent: str) -> TruthfulStrategy:
    """Truthful strategy of `agent`."""
    if agent != PUBLIC_AGENT:
        spec.agent_position(agent)
    return TruthfulStrategy(agent)


@dataclass(frozen=True)
class StrategySet:
    """Ordered named strategies of one agent (rows or columns of a matrix game)."""
    agent: str
    strategies: Tuple[Strategy, ...]

    def __post_init__(self):
        """Validate names and ownership."""
        names = [strategy.name for strategy in self.strategies]
        if len(set(names)) != len(names):
            raise ValidationError(f"Strategy names for {self.agent} must be unique, got {names}")
        for strategy in self.strategies:
            if strategy.agent != self.agent:
                raise ValidationError(
                    f"Strategy {strategy.name!r} belongs to {strategy.agent}, not {self.agent}"
                )

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(strategy.name for strategy in self.strategies)

    def get(self, name: str) -> Strategy:
        for strategy in self.strategies:
            if strategy.name == name:
                return strategy
        raise ValidationError(f"Unknown strategy {name!r} for {self.agent} (known: {list(self.names)})")

    def __len__(self) -> int:
        return len(self.strategies)


class StrategyProfile:
    """
    One strategy per agent; agents without an entry play truthfully.

    Example:
        profile = StrategyProfile(spec, {"blue": opposite_blue})
        profile.for_agent("red").is_truthful  # True
    """

    def __init__(self, spec: GameSpec, strategies: Optional[Mapping[str, Strategy]] = None):
        self.spec = spec
        self._strategies: Dict[str, Strategy] = {}
        for agent, strategy in (strategies or {}).items():
            spec.agent_position(agent)
            if strategy.agent != agent:
                raise ValidationError(f"Strategy {strategy.name!r} of {strategy.agent} assigned to {agent}")
            self._strategies[agent] = strategy

    def for_agent(self, agent: str) -> Strategy:
        strategy = self._strategies.get(agent)
        if strategy is None:
            strategy = TruthfulStrategy(agent)
            self._strategies[agent] = strategy
        return strategy

    def with_strategy(self, strategy: Strategy) -> "StrategyProfile":
        strategies = {agent: self.for_agent(agent) for agent in self.spec.agents}
        strategies[strategy.agent] = strategy
        return StrategyProfile(self.spec, strategies)

    @property
    def names(self) -> Dict[str, str]:
        return {agent: self.for_agent(agent).name for agent in self.spec.agents}

    def describe(self) -> str:
        return ", ".join(f"{agent}={name}" for agent, name in self.names.items())
