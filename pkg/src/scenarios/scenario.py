"""
Scenario - a game bundled with its registered strategies and analysis defaults

A Scenario carries everything a command needs besides the game itself:
- a strategy library per agent (named strategies, scripted or truthful)
- the table layout (which library strategies form the matrix game)
- named profiles (agent -> strategy name; missing agents play truthfully)
- analysis defaults: mechanism, payoff measure, price coefficient, display
  normalization

Tenet #5: Make Illegal States Unrepresentable
Tenet #7: Immutability by Default
"""

from dataclasses import dataclass, replace
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from src.core.errors import ValidationError
from src.core.game_spec import GameSpec
from src.core.rational import format_rat
from src.mechanisms.base import MechanismKind
from src.orchestrator.outcome import PayoffMeasure
from src.strategies.base import Strategy, StrategyProfile, StrategySet

TRUTHFUL_PROFILE = "truthful"


class ScenarioKind(Enum):
    """Where a scenario comes from."""
    EXAMPLE1 = "example1"
    APPENDIX_A = "appendixA"
    APPENDIX_B = "appendixB"
    YES_NO = "yesno"
    COLLUSION = "collusion"
    RANDOM = "random"
    FILE = "file"


@dataclass(frozen=True)
class Scenario:
    """
    A validated game plus its registered strategies.

    Attributes:
        spec: The game
        kind: Builder family
        parameters: Builder parameters as (name, text) pairs
        library: One StrategySet per agent with registered strategies
        table: (agent, strategy names) rows of the default matrix game
        profiles: (profile name, ((agent, strategy name), ...)) pairs
        coefficient: Price coefficient of the report-price identities
        normalization: Display factor for tables
        measure: Payoff component shown in tables
        mechanism: Default transfer rule
        notes: Free-text remarks shown by `scenario show`
    """
    spec: GameSpec
    kind: ScenarioKind
    parameters: Tuple[Tuple[str, str], ...] = ()
    library: Tuple[StrategySet, ...] = ()
    table: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()
    profiles: Tuple[Tuple[str, Tuple[Tuple[str, str], ...]], ...] = ()
    coefficient: Optional[Fraction] = None
    normalization: Optional[Fraction] = None
    measure: PayoffMeasure = PayoffMeasure.TOTAL
    mechanism: MechanismKind = MechanismKind.BALANCED_TEAM
    notes: Tuple[str, ...] = ()

    def __post_init__(self):
        """Validate that every table entry and profile resolves in the library."""
        agents = [strategy_set.agent for strategy_set in self.library]
        if len(set(agents)) != len(agents):
            raise ValidationError(f"One strategy library per agent, got {agents}")
        for agent in agents:
            self.spec.agent_position(agent)

        table_agents = [agent for agent, _ in self.table]
        if len(set(table_agents)) != len(table_agents):
            raise ValidationError(f"Table lists an agent twice: {table_agents}")
        for agent, names in self.table:
            if not names:
                raise ValidationError(f"Table row of {agent} has no strategies")
            for name in names:
                self.strategy(agent, name)

        seen = set()
        for profile_name, assignment in self.profiles:
            if profile_name in seen:
                raise ValidationError(f"Duplicate profile {profile_name!r}")
            seen.add(profile_name)
            for agent, name in assignment:
                self.strategy(agent, name)

        if self.normalization is not None and self.normalization <= 0:
            raise ValidationError(f"Normalization must be positive, got {self.normalization}")

    @property
    def name(self) -> str:
        return self.spec.name

    @property
    def profile_names(self) -> Tuple[str, ...]:
        names = tuple(name for name, _ in self.profiles)
        return names if TRUTHFUL_PROFILE in names else (TRUTHFUL_PROFILE,) + names

    def library_of(self, agent: str) -> Optional[StrategySet]:
        for strategy_set in self.library:
            if strategy_set.agent == agent:
                return strategy_set
        return None

    def strategy(self, agent: str, name: str) -> Strategy:
        strategy_set = self.library_of(agent)
        if strategy_set is None:
            raise ValidationError(f"No registered strategies for {agent!r} in {self.name}", agent=agent)
        return strategy_set.get(name)

    def sets_by_agent(self) -> Dict[str, StrategySet]:
        return {strategy_set.agent: strategy_set for strategy_set in self.library}

    def table_sets(self, restrict: Optional[Mapping[str, Sequence[str]]] = None) -> List[StrategySet]:
        """
        Strategy sets of the matrix game.

        Args:
            restrict: Optional agent -> strategy names overriding the default rows
        """
        rows = dict(self.table)
        for agent, names in (restrict or {}).items():
            rows[agent] = tuple(names)
        if not rows:
            raise ValidationError(f"Scenario {self.name} has no strategy table")
        sets = []
        for agent, names in rows.items():
            if not names:
                raise ValidationError(f"Empty strategy set for {agent}")
            sets.append(StrategySet(agent, tuple(self.strategy(agent, name) for name in names)))
        return sets

    def profile(self, name: str = TRUTHFUL_PROFILE) -> StrategyProfile:
        """Named profile; `truthful` is always available."""
        assignments = dict(self.profiles)
        if name not in assignments:
            if name == TRUTHFUL_PROFILE:
                return StrategyProfile(self.spec)
            raise ValidationError(
                f"Unknown profile {name!r} for {self.name} (known: {list(self.profile_names)})",
                profile=name,
            )
        return StrategyProfile(
            self.spec, {agent: self.strategy(agent, strategy) for agent, strategy in assignments[name]}
        )

    def with_table(self, table: Sequence[Tuple[str, Sequence[str]]]) -> "Scenario":
        return replace(self, table=tuple((agent, tuple(names)) for agent, names in table))

    def to_dict(self) -> dict:
        """Summary for display and logging."""
        return {
            "name": self.name,
            "kind": self.kind.value,
            "description": self.spec.description,
            "parameters": dict(self.parameters),
            "horizon": self.spec.horizon,
            "agents": list(self.spec.agents),
            "mechanism": self.mechanism.value,
            "measure": self.measure.value,
            "coefficient": None if self.coefficient is None else format_rat(self.coefficient),
            "normalization": None if self.normalization is None else format_rat(self.normalization),
            "strategies": {s.agent: list(s.names) for s in self.library},
            "table": {agent: list(names) for agent, names in self.table},
            "profiles": list(self.profile_names),
            "notes": list(self.notes),
        }


def cell_profiles(table: Sequence[Tuple[str, Sequence[str]]]) -> Tuple[Tuple[str, Tuple[Tuple[str, str], ...]], ...]:
    """
    Profiles "row{i}xcol{j}" for every cell of a two-agent table (1-based).

    Example:
        cell_profiles([("blue", ("a", "b")), ("red", ("c",))])
        # (("row1xcol1", (("blue", "a"), ("red", "c"))), ("row2xcol1", ...))
    """
    if len(table) != 2:
        return ()
    (row_agent, rows), (column_agent, columns) = table
    return tuple(
        (f"row{i}xcol{j}", ((row_agent, row), (column_agent, column)))
        for i, row in enumerate(rows, start=1)
        for j, column in enumerate(columns, start=1)
    )
