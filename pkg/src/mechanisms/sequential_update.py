"""
Sequential-Update Mechanism

Within a round the public agent is updated first, then the agents one by
one in a fixed order. When agent a's report is added, every other agent m
pays a exactly the change of m's own trustful expected utility:

    m pays a:  V^m(stage with a) - V^m(stage without a)

Whoever gains from a new report pays for it, whoever loses is compensated,
so the round's net transfers sum to zero.
"""

from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

from src.core.errors import ValidationError
from src.core.game_spec import GameSpec
from src.core.types import PUBLIC_AGENT
from src.policy.efficient_policy import DecisionPolicy, Profile

from .base import Mechanism, MechanismKind, Payment, RoundTransfers, net_from_payments


def step_payments(updater: str, deltas: Mapping[str, Fraction]) -> Tuple[Payment, ...]:
    """
    Payments caused by one report.

    Args:
        updater: Agent whose report was just added
        deltas: Change of every other agent's expected utility

    Example:
        step_payments("blue", {"red": 15, "green": -5})
        # red pays blue 15, green receives 5: blue nets 10
    """
    return tuple(
        Payment(agent, updater, Fraction(delta))
        for agent, delta in deltas.items()
        if agent != updater and delta != 0
    )


class SequentialUpdateMechanism(Mechanism):
    """
    Fixed-order sequential-update mechanism.

    `step_payments_for` is the per-step hook; subclasses may override it to
    alter a single step.
    """

    kind = MechanismKind.SEQUENTIAL_UPDATE

    def __init__(
        self,
        spec: GameSpec,
        policy: Optional[DecisionPolicy] = None,
        order: Optional[Sequence[str]] = None,
    ):
        super().__init__(spec, policy)
        self.order: Tuple[str, ...] = tuple(order) if order is not None else tuple(spec.agents)
        if sorted(self.order) != sorted(spec.agents):
            raise ValidationError(
                f"Order {list(self.order)} is not a permutation of {list(spec.agents)}",
                order=list(self.order),
            )

    @property
    def name(self) -> str:
        return f"{self.kind.value}({','.join(self.order)})"

    def step_deltas(
        self,
        round_index: int,
        previous: Profile,
        before: Mapping[str, str],
        agent: str,
        label: str,
    ) -> Dict[str, Fraction]:
        """Change of every other agent's expected utility when `agent` reports `label`."""
        old = self._stage(round_index, previous, dict(before))
        new = self._stage(round_index, previous, {**before, agent: label})
        return {
            other: new[index] - old[index]
            for index, other in enumerate(self.spec.agents)
            if other != agent
        }

    def step_payments_for(
        self,
        round_index: int,
        previous: Profile,
        before: Mapping[str, str],
        agent: str,
        label: str,
    ) -> Tuple[Payment, ...]:
        """Payments of one update step (overridable hook)."""
        return step_payments(agent, self.step_deltas(round_index, previous, before, agent, label))

    def round_transfers(self, round_index: int, previous: Profile, current: Profile) -> RoundTransfers:
        updated: Dict[str, str] = {PUBLIC_AGENT: current[0]}
        payments = []
        gamma = [Fraction(0)] * len(self.spec.agents)
        for agent in self.order:
            label = current[self.spec.profile_position(agent)]
            step = self.step_payments_for(round_index, previous, updated, agent, label)
            payments.extend(step)
            gamma[self.spec.agent_position(agent)] = sum(
                (payment.amount for payment in step if payment.payee == agent), Fraction(0)
            )
            updated[agent] = label
        payments = tuple(payments)
        return RoundTransfers(
            round_index,
            tuple(gamma),
            net_from_payments(self.spec.agents, payments),
            payments,
        )
