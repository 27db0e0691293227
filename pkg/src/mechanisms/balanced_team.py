"""
Balanced Team Mechanism

gamma^i_t is the change in the other agents' trustful expected utility when
only agent i's report moves from round t-1 to round t (the public agent is
updated first, free of charge). The price is financed equally by the other
n-1 agents:

    y^i_t = gamma^i_t - 1/(n-1) * sum_{j != i} gamma^j_t
"""

from fractions import Fraction
from typing import Sequence

from src.core.errors import ValidationError
from src.core.types import PUBLIC_AGENT
from src.policy.efficient_policy import Profile, ValueTable, Vector

from .base import Mechanism, MechanismKind, Payment, RoundTransfers, TransferLedger, net_from_payments


def balanced_gamma(
    table: ValueTable, round_index: int, current: Profile, previous: Profile
) -> Vector:
    """
    Report prices of round t.

    Example:
        Example 1 with utilities (1, 4, -6): gamma^blue_t = 2 * red_{t-1} * (blue_{t-1} - blue_t)
    """
    spec = table.spec
    base_update = {PUBLIC_AGENT: current[0]}
    base = table.stage_value(round_index, previous, base_update)
    gamma = []
    for agent in spec.agents:
        moved = table.stage_value(
            round_index,
            previous,
            {**base_update, agent: current[spec.profile_position(agent)]},
        )
        own = spec.agent_position(agent)
        gamma.append(
            sum((moved[j] - base[j] for j in range(len(spec.agents)) if j != own), Fraction(0))
        )
    return tuple(gamma)


def balanced_round(
    agents: Sequence[str], round_index: int, gamma: Vector
) -> RoundTransfers:
    """Settle one round: every other agent pays agent i gamma^i / (n-1)."""
    if len(agents) < 2:
        raise ValidationError(
            f"The balanced rule needs at least two agents, got {len(agents)}", agents=list(agents)
        )
    share = Fraction(1, len(agents) - 1)
    payments = tuple(
        Payment(payer, payee, gamma[index] * share)
        for index, payee in enumerate(agents)
        if gamma[index] != 0
        for payer in agents
        if payer != payee
    )
    return RoundTransfers(round_index, tuple(gamma), net_from_payments(agents, payments), payments)


def balanced_settle(agents: Sequence[str], gamma_history: Sequence[Vector]) -> TransferLedger:
    """
    Ledger for a whole gamma history (round 1 first).

    Example:
        balanced_settle(("a", "b", "c"), [(3, 0, 0)]).totals == (3, -3/2, -3/2)
    """
    rounds = tuple(
        balanced_round(agents, index + 1, tuple(Fraction(value) for value in gamma))
        for index, gamma in enumerate(gamma_history)
    )
    return TransferLedger(tuple(agents), rounds, MechanismKind.BALANCED_TEAM.value)


class BalancedTeamMechanism(Mechanism):
    """Balanced Team Mechanism (equal sharing of every report price)."""

    kind = MechanismKind.BALANCED_TEAM

    def round_transfers(self, round_index: int, previous: Profile, current: Profile) -> RoundTransfers:
        gamma = balanced_gamma(self.table, round_index, current, previous)
        return balanced_round(self.spec.agents, round_index, gamma)
