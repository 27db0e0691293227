"""
Shapley-Averaged Mechanism

The sequential-update payments averaged over every order of the agents.
The average is computed exactly with the subset form of the Shapley
weights: an order places the set S of other agents before a with
probability |S|! (n-|S|-1)! / n!.
"""

from fractions import Fraction
from itertools import combinations
from math import factorial
from typing import Dict, Optional, Tuple

import structlog

from src.core.errors import ResourceLimitExceeded
from src.core.game_spec import GameSpec
from src.core.types import PUBLIC_AGENT
from src.policy.efficient_policy import DecisionPolicy, Profile

from .base import Mechanism, MechanismKind, Payment, RoundTransfers, net_from_payments

logger = structlog.get_logger()

DEFAULT_MAX_SHAPLEY_AGENTS = 12


def shapley_weight(coalition_size: int, agent_count: int) -> Fraction:
    """Probability that exactly a given set of `coalition_size` others precedes an agent."""
    return Fraction(
        factorial(coalition_size) * factorial(agent_count - coalition_size - 1),
        factorial(agent_count),
    )


class ShapleyAveragedMechanism(Mechanism):
    """Sequential-update payments averaged over all n! orders."""

    kind = MechanismKind.SHAPLEY_AVERAGED

    def __init__(
        self,
        spec: GameSpec,
        policy: Optional[DecisionPolicy] = None,
        max_agents: int = DEFAULT_MAX_SHAPLEY_AGENTS,
    ):
        if len(spec.agents) > max_agents:
            logger.error("shapley_agent_limit", agents=len(spec.agents), limit=max_agents)
            raise ResourceLimitExceeded(
                f"Shapley averaging over {len(spec.agents)} agents exceeds the limit of {max_agents}",
                agents=len(spec.agents),
                limit=max_agents,
            )
        super().__init__(spec, policy)

    def round_transfers(self, round_index: int, previous: Profile, current: Profile) -> RoundTransfers:
        agents = self.spec.agents
        count = len(agents)
        pair_amounts: Dict[Tuple[str, str], Fraction] = {}
        for agent in agents:
            others = [other for other in agents if other != agent]
            label = current[self.spec.profile_position(agent)]
            for size in range(count):
                weight = shapley_weight(size, count)
                for predecessors in combinations(others, size):
                    before = {PUBLIC_AGENT: current[0]}
                    before.update({other: current[self.spec.profile_position(other)] for other in predecessors})
                    old = self._stage(round_index, previous, before)
                    new = self._stage(round_index, previous, {**before, agent: label})
                    for index, other in enumerate(agents):
                        if other == agent:
                            continue
                        delta = new[index] - old[index]
                        if delta != 0:
                            key = (other, agent)
                            pair_amounts[key] = pair_amounts.get(key, Fraction(0)) + weight * delta

        payments = tuple(
            Payment(payer, payee, amount) for (payer, payee), amount in pair_amounts.items() if amount != 0
        )
        gamma = tuple(
            sum((p.amount for p in payments if p.payee == agent), Fraction(0)) for agent in agents
        )
        return RoundTransfers(round_index, gamma, net_from_payments(agents, payments), payments)
