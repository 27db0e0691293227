"""
Unbalanced Team Mechanism

Every agent is paid, from an outside budget, the other agents' utility of
the round evaluated at the reported types and the efficient decision:

    gamma^i_t = sum_{j != i} u^j_t(xi(t, reports_t), reports_t)

Nothing is charged back, so the ledger records the external subsidy. The
expected round-by-round increments are the same report prices as the
balanced rule, but the realized payments let two agents inflate each
other's transfers: a partner who reports 1000 is credited 1000 whatever
their true signal.
"""

from fractions import Fraction

from src.core.game_spec import EXTERNAL_PAYER
from src.policy.efficient_policy import Profile

from .base import Mechanism, MechanismKind, Payment, RoundTransfers


class UnbalancedTeamMechanism(Mechanism):
    """Team transfers financed from outside; Σ_i y^i is unconstrained."""

    kind = MechanismKind.UNBALANCED_TEAM
    budget_balanced = False

    def round_transfers(self, round_index: int, previous: Profile, current: Profile) -> RoundTransfers:
        action = self.policy.decide(round_index, current)
        reported_utility = self.spec.utility(round_index, action, current)
        total = sum(reported_utility, Fraction(0))
        gamma = tuple(total - own for own in reported_utility)
        payments = tuple(
            Payment(EXTERNAL_PAYER, agent, amount)
            for agent, amount in zip(self.spec.agents, gamma)
            if amount != 0
        )
        return RoundTransfers(round_index, gamma, gamma, payments, subsidy=sum(gamma, Fraction(0)))
