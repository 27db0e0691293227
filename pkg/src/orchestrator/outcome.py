"""
Play Outcomes - immutable results of evaluating a strategy profile

Tenet #7: Immutability by Default
Tenet #9: Visibility and Explainability at Every Layer
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Tuple

from src.core.errors import ValidationError
from src.core.types import Action
from src.mechanisms.base import TransferLedger
from src.policy.efficient_policy import Profile, Vector, add_vectors


class PayoffMeasure(Enum):
    """Which component of the payoff a table or check reads."""
    TOTAL = "total"        # utility plus net transfer
    GAMMA = "gamma"        # report prices gamma only
    UTILITY = "utility"
    TRANSFER = "transfer"  # net transfer y^i


@dataclass(frozen=True)
class PlayPath:
    """
    One complete path of play with its probability.

    Attributes:
        probability: Exact path probability
        types: True type profiles of rounds 0..T (public agent first)
        reports: Reported profiles of rounds 0..T
        actions: Decisions actually taken in rounds 1..T
        utilities: Realized utility per agent
        ledger: Transfers along the path
    """
    probability: Fraction
    types: Tuple[Profile, ...]
    reports: Tuple[Profile, ...]
    actions: Tuple[Action, ...]
    utilities: Vector
    ledger: TransferLedger

    @property
    def payoffs(self) -> Vector:
        return add_vectors(self.utilities, self.ledger.totals)

    def to_dict(self) -> dict:
        agents = self.ledger.agents
        return {
            "probability": str(self.probability),
            "types": [list(profile) for profile in self.types],
            "reports": [list(profile) for profile in self.reports],
            "decisions": [action.label() for action in self.actions],
            "utilities": {agent: str(value) for agent, value in zip(agents, self.utilities)},
            "ledger": self.ledger.to_dict(),
        }


@dataclass(frozen=True)
class PayoffVector:
    """
    Expected payoff components per agent.

    Example:
        payoffs = expected_payoffs(spec, mechanism, profile)
        payoffs.of("blue")                       # utility + transfer
        payoffs.of("blue", PayoffMeasure.GAMMA)  # expected report prices
    """
    agents: Tuple[str, ...]
    utility: Vector
    transfer: Vector
    gamma: Vector
    subsidy: Fraction = Fraction(0)
    paths: int = 0

    def __post_init__(self):
        """Validate component shapes."""
        for name in ("utility", "transfer", "gamma"):
            if len(getattr(self, name)) != len(self.agents):
                raise ValidationError(
                    f"Payoff component {name} has {len(getattr(self, name))} entries, "
                    f"expected {len(self.agents)}"
                )

    @property
    def total(self) -> Vector:
        return add_vectors(self.utility, self.transfer)

    def measure(self, measure: PayoffMeasure) -> Vector:
        if measure == PayoffMeasure.TOTAL:
            return self.total
        if measure == PayoffMeasure.GAMMA:
            return self.gamma
        if measure == PayoffMeasure.UTILITY:
            return self.utility
        return self.transfer

    def of(self, agent: str, measure: PayoffMeasure = PayoffMeasure.TOTAL) -> Fraction:
        try:
            position = self.agents.index(agent)
        except ValueError:
            raise ValidationError(f"Unknown agent {agent!r}") from None
        return self.measure(measure)[position]

    def to_dict(self) -> dict:
        return {
            "agents": list(self.agents),
            "total": {agent: str(value) for agent, value in zip(self.agents, self.total)},
            "utility": {agent: str(value) for agent, value in zip(self.agents, self.utility)},
            "transfer": {agent: str(value) for agent, value in zip(self.agents, self.transfer)},
            "gamma": {agent: str(value) for agent, value in zip(self.agents, self.gamma)},
            "subsidy": str(self.subsidy),
            "paths": self.paths,
        }
