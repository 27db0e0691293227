"""
Transfer Mechanism Interface

Every mechanism prices one round of reports: given the reported profile of
round t-1 and of round t it returns the round's RoundTransfers. Ledgers
aggregate rounds along one path of play.

Design Pattern: Strategy (one interface, several transfer rules)

Tenet #7: Immutability by Default
Tenet #9: Visibility - every payment is recorded with payer and payee
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd

from src.core.game_spec import GameSpec
from src.core.rational import format_rat
from src.policy.efficient_policy import DecisionPolicy, Profile, ValueTable, Vector, compute_efficient_policy


class MechanismKind(Enum):
    """Available transfer rules."""
    BALANCED_TEAM = "balanced"
    SEQUENTIAL_UPDATE = "sequential"
    SHAPLEY_AVERAGED = "shapley"
    UNBALANCED_TEAM = "unbalanced"
    NONE = "none"


@dataclass(frozen=True)
class Payment:
    """Signed payment: `payer` gives `amount` to `payee` (negative reverses it)."""
    payer: str
    payee: str
    amount: Fraction


@dataclass(frozen=True)
class RoundTransfers:
    """
    Transfers of one round.

    Attributes:
        round: Round index t (1..T)
        gamma: Per-agent report price, aligned with GameSpec.agents
        net: Per-agent net transfer y^i_t, aligned with GameSpec.agents
        payments: Pairwise payments behind `net`
        subsidy: Money injected from outside (unbalanced rules only)
    """
    round: int
    gamma: Tuple[Fraction, ...]
    net: Tuple[Fraction, ...]
    payments: Tuple[Payment, ...] = ()
    subsidy: Fraction = Fraction(0)

    @property
    def budget_sum(self) -> Fraction:
        return sum(self.net, Fraction(0))

    def to_dict(self, agents: Sequence[str]) -> dict:
        return {
            "round": self.round,
            "gamma": {agent: str(value) for agent, value in zip(agents, self.gamma)},
            "net": {agent: str(value) for agent, value in zip(agents, self.net)},
            "payments": [
                {"payer": p.payer, "payee": p.payee, "amount": str(p.amount)} for p in self.payments
            ],
            "subsidy": str(self.subsidy),
        }


def net_from_payments(agents: Sequence[str], payments: Sequence[Payment]) -> Tuple[Fraction, ...]:
    """Net inflow per agent; payers outside `agents` (the external budget) are skipped."""
    position = {agent: index for index, agent in enumerate(agents)}
    net = [Fraction(0)] * len(agents)
    for payment in payments:
        if payment.payee in position:
            net[position[payment.payee]] += payment.amount
        if payment.payer in position:
            net[position[payment.payer]] -= payment.amount
    return tuple(net)


@dataclass(frozen=True)
class TransferLedger:
    """
    Transfers along one path of play.

    Example:
        ledger = mechanism.ledger(path.reports)
        ledger.totals      # y^i per agent
        ledger.to_frame()  # round, payer, payee, amount
    """
    agents: Tuple[str, ...]
    rounds: Tuple[RoundTransfers, ...]
    mechanism: str = ""

    @property
    def totals(self) -> Tuple[Fraction, ...]:
        """Total transfer y^i to every agent."""
        totals = [Fraction(0)] * len(self.agents)
        for transfers in self.rounds:
            for index, value in enumerate(transfers.net):
                totals[index] += value
        return tuple(totals)

    @property
    def gamma_totals(self) -> Tuple[Fraction, ...]:
        totals = [Fraction(0)] * len(self.agents)
        for transfers in self.rounds:
            for index, value in enumerate(transfers.gamma):
                totals[index] += value
        return tuple(totals)

    @property
    def subsidy(self) -> Fraction:
        return sum((transfers.subsidy for transfers in self.rounds), Fraction(0))

    def total_of(self, agent: str) -> Fraction:
        return self.totals[self.agents.index(agent)]

    def payment_rows(self) -> List[Tuple[int, str, str, Fraction]]:
        return [
            (transfers.round, payment.payer, payment.payee, payment.amount)
            for transfers in self.rounds
            for payment in transfers.payments
        ]

    def to_frame(self, decimal: Optional[int] = None) -> pd.DataFrame:
        """Payments as a DataFrame with exact fractions rendered as text."""
        rows = [
            {"round": t, "payer": payer, "payee": payee, "amount": format_rat(amount, decimal)}
            for t, payer, payee, amount in self.payment_rows()
        ]
        return pd.DataFrame(rows, columns=["round", "payer", "payee", "amount"])

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "rounds": [transfers.to_dict(self.agents) for transfers in self.rounds],
            "totals": {agent: str(value) for agent, value in zip(self.agents, self.totals)},
            "subsidy": str(self.subsidy),
        }


class Mechanism(ABC):
    """
    Base class for transfer rules.

    Subclasses implement `round_transfers`. The efficient policy and the
    trustful value table are shared by every round of every path.
    """

    kind: MechanismKind
    budget_balanced: bool = True

    def __init__(self, spec: GameSpec, policy: Optional[DecisionPolicy] = None):
        self.spec = spec
        self.policy = policy if policy is not None else compute_efficient_policy(spec)
        self.table = ValueTable(self.policy)
        self._transfer_memo: Dict[tuple, RoundTransfers] = {}

    @property
    def name(self) -> str:
        return self.kind.value

    @property
    def zero(self) -> Vector:
        return self.policy.zero

    @abstractmethod
    def round_transfers(self, round_index: int, previous: Profile, current: Profile) -> RoundTransfers:
        """
        Price the reports of round t.

        Args:
            round_index: Round t (1..T)
            previous: Reported profile of round t-1 (initial types for t = 1)
            current: Reported profile of round t
        """

    def transfers(self, round_index: int, previous: Profile, current: Profile) -> RoundTransfers:
        """Memoized `round_transfers`."""
        key = (round_index, previous, current)
        cached = self._transfer_memo.get(key)
        if cached is None:
            cached = self.round_transfers(round_index, previous, current)
            self._transfer_memo[key] = cached
        return cached

    def ledger(self, reports: Sequence[Profile]) -> TransferLedger:
        """Ledger for a report history `reports[0..T]` (reports[0] = initial types)."""
        rounds = tuple(self.transfers(t, reports[t - 1], reports[t]) for t in range(1, len(reports)))
        return TransferLedger(tuple(self.spec.agents), rounds, self.name)

    def _stage(self, round_index: int, previous: Profile, updated: Dict[str, str]) -> Vector:
        return self.table.stage_value(round_index, previous, updated)


class NoTransfers(Mechanism):
    """No money changes hands."""

    kind = MechanismKind.NONE

    def round_transfers(self, round_index: int, previous: Profile, current: Profile) -> RoundTransfers:
        return RoundTransfers(round_index, self.zero, self.zero)
