"""
Induced Normal Forms

Restricting every table agent to a finite StrategySet turns the dynamic
game into a matrix game whose cells are exact expected payoffs. Cells are
stored exactly; the optional normalization factor only scales display.

Tenet #7: Immutability by Default
"""

import io
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

import pandas as pd
import structlog

from src.core.errors import ParseError, ValidationError
from src.core.game_spec import GameSpec
from src.core.rational import format_rat, parse_rat
from src.mechanisms.base import Mechanism
from src.orchestrator.outcome import PayoffMeasure
from src.orchestrator.play import DEFAULT_MAX_PATHS, expected_payoffs
from src.strategies.base import StrategyProfile, StrategySet

logger = structlog.get_logger()

Cell = Tuple[str, ...]
PAYOFF_PREFIX = "payoff:"


@dataclass(frozen=True)
class NormalForm:
    """
    Payoff tensor over named strategies.

    Attributes:
        agents: Table agents (row agent first)
        strategies: Strategy names per table agent
        payoffs: Cell (one name per agent) -> payoff per table agent
        measure: Payoff component stored in the cells
        normalization: Display factor (e.g. 1/3); never applied to stored values
    """
    agents: Tuple[str, ...]
    strategies: Tuple[Tuple[str, ...], ...]
    payoffs: Mapping[Cell, Tuple[Fraction, ...]] = field(hash=False, compare=True)
    measure: PayoffMeasure = PayoffMeasure.TOTAL
    normalization: Optional[Fraction] = None

    def __post_init__(self):
        """Validate tensor completeness."""
        if len(self.strategies) != len(self.agents):
            raise ValidationError(
                f"Expected strategy names for {len(self.agents)} agents, got {len(self.strategies)}"
            )
        for agent, names in zip(self.agents, self.strategies):
            if not names or len(set(names)) != len(names):
                raise ValidationError(f"Strategy names of {agent} must be non-empty and unique")
        missing = [cell for cell in self.cells() if cell not in self.payoffs]
        if missing:
            raise ValidationError(f"Normal form misses {len(missing)} cells, first {missing[0]}")
        for cell, values in self.payoffs.items():
            if len(values) != len(self.agents):
                raise ValidationError(f"Cell {cell} has {len(values)} payoffs, expected {len(self.agents)}")
        if self.normalization is not None and self.normalization <= 0:
            raise ValidationError(f"Normalization must be positive, got {self.normalization}")

    def cells(self) -> Iterator[Cell]:
        return product(*self.strategies)

    def position(self, agent: str) -> int:
        try:
            return self.agents.index(agent)
        except ValueError:
            raise ValidationError(f"{agent!r} is not a table agent of this normal form") from None

    def payoff(self, cell: Sequence[str], agent: str) -> Fraction:
        return self.payoffs[tuple(cell)][self.position(agent)]

    def displayed(self, value: Fraction) -> Fraction:
        return value * self.normalization if self.normalization is not None else value

    def restrict(self, remaining: Sequence[Sequence[str]]) -> "NormalForm":
        """Sub-table on the given strategies (kept in their original order)."""
        strategies = tuple(
            tuple(name for name in names if name in set(keep))
            for names, keep in zip(self.strategies, remaining)
        )
        payoffs = {cell: self.payoffs[cell] for cell in product(*strategies)}
        return NormalForm(self.agents, strategies, payoffs, self.measure, self.normalization)

    def pure_nash(self) -> List[Cell]:
        """Cells where no table agent gains by switching to another listed strategy."""
        equilibria = []
        for cell in self.cells():
            stable = True
            for index, names in enumerate(self.strategies):
                current = self.payoffs[cell][index]
                for alternative in names:
                    deviation = cell[:index] + (alternative,) + cell[index + 1:]
                    if self.payoffs[deviation][index] > current:
                        stable = False
                        break
                if not stable:
                    break
            if stable:
                equilibria.append(cell)
        return equilibria

    # ------------------------------------------------------------------
    # Export
    # ------------------------------------------------------------------

    def to_records(self, decimal: Optional[int] = None, normalized: bool = False) -> List[Dict[str, str]]:
        records = []
        for cell in self.cells():
            record = dict(zip(self.agents, cell))
            for agent, value in zip(self.agents, self.payoffs[cell]):
                shown = self.displayed(value) if normalized else value
                record[f"{PAYOFF_PREFIX}{agent}"] = format_rat(shown, decimal)
            records.append(record)
        return records

    def to_frame(self, decimal: Optional[int] = None, normalized: bool = True) -> pd.DataFrame:
        """
        Table for display.

        Two-agent games render as a matrix (rows: first agent, columns:
        second agent) with "(a, b)" cells; larger games in long format.
        """
        if len(self.agents) != 2:
            return pd.DataFrame(self.to_records(decimal, normalized))
        rows, columns = self.strategies
        matrix = {}
        for column in columns:
            matrix[column] = [
                "(" + ", ".join(
                    format_rat(self.displayed(v) if normalized else v, decimal)
                    for v in self.payoffs[(row, column)]
                ) + ")"
                for row in rows
            ]
        frame = pd.DataFrame(matrix, index=list(rows))
        frame.index.name = f"{self.agents[0]} \\ {self.agents[1]}"
        return frame

    def render(self, decimal: Optional[int] = None, normalized: bool = True) -> str:
        header = f"{self.measure.value} payoffs"
        if normalized and self.normalization is not None:
            header += f" x {format_rat(self.normalization)}"
        return f"{header}\n{self.to_frame(decimal, normalized).to_string()}"

    def to_csv(self) -> str:
        """Long-format CSV with exact fractions."""
        columns = list(self.agents) + [f"{PAYOFF_PREFIX}{agent}" for agent in self.agents]
        return pd.DataFrame(self.to_records(), columns=columns).to_csv(index=False)

    @classmethod
    def from_csv(
        cls,
        text: str,
        measure: PayoffMeasure = PayoffMeasure.TOTAL,
        normalization: Optional[Fraction] = None,
    ) -> "NormalForm":
        """Inverse of `to_csv`; strategy order follows first appearance."""
        frame = pd.read_csv(io.StringIO(text), dtype=str, keep_default_na=False)
        agents = tuple(column for column in frame.columns if not column.startswith(PAYOFF_PREFIX))
        expected = [f"{PAYOFF_PREFIX}{agent}" for agent in agents]
        if [column for column in frame.columns if column.startswith(PAYOFF_PREFIX)] != expected:
            raise ParseError(f"Payoff columns must be {expected}")
        strategies = tuple(tuple(dict.fromkeys(frame[agent])) for agent in agents)
        payoffs = {}
        for line, record in enumerate(frame.to_dict("records"), start=2):
            cell = tuple(record[agent] for agent in agents)
            try:
                payoffs[cell] = tuple(parse_rat(record[column]) for column in expected)
            except ParseError as error:
                raise ParseError(str(error), line=line) from error
        return cls(agents, strategies, payoffs, measure, normalization)


def induced_normal_form(
    spec: GameSpec,
    mechanism: Mechanism,
    sets: Sequence[StrategySet],
    measure: PayoffMeasure = PayoffMeasure.TOTAL,
    base: Optional[StrategyProfile] = None,
    normalization: Optional[Fraction] = None,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> NormalForm:
    """
    Evaluate every combination of the given strategy sets.

    Args:
        spec: Validated game
        mechanism: Transfer rule
        sets: One StrategySet per table agent
        measure: Payoff component stored in the cells
        base: Strategies of agents without a set (truthful by default)
        normalization: Display factor

    Example:
        nf = induced_normal_form(spec, BalancedTeamMechanism(spec), [blue_set, red_set],
                                 PayoffMeasure.GAMMA, normalization=Fraction(1, 3))
        nf.render()
    """
    agents = tuple(strategy_set.agent for strategy_set in sets)
    if len(set(agents)) != len(agents):
        raise ValidationError(f"One strategy set per agent, got {list(agents)}")
    base = base or StrategyProfile(spec)
    positions = [spec.agent_position(agent) for agent in agents]

    payoffs = {}
    for strategies in product(*(strategy_set.strategies for strategy_set in sets)):
        profile = base
        for strategy in strategies:
            profile = profile.with_strategy(strategy)
        vector = expected_payoffs(spec, mechanism, profile, max_paths).measure(measure)
        cell = tuple(strategy.name for strategy in strategies)
        payoffs[cell] = tuple(vector[position] for position in positions)

    normal_form = NormalForm(
        agents, tuple(strategy_set.names for strategy_set in sets), payoffs, measure, normalization
    )
    logger.info(
        "normal_form_computed",
        scenario=spec.name,
        mechanism=mechanism.name,
        agents=list(agents),
        cells=len(payoffs),
        measure=measure.value,
    )
    return normal_form
