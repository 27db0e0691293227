"""
Mechanism Factory

Creates transfer rules from a MechanismKind (or its CLI name) and shares one
efficient policy between them.

Usage:
    mechanism = MechanismFactory.create("sequential", spec, order=("red", "blue", "green"))
"""

from typing import Optional, Sequence, Union

import structlog

from src.core.errors import ValidationError
from src.core.game_spec import GameSpec
from src.policy.efficient_policy import DecisionPolicy

from .balanced_team import BalancedTeamMechanism
from .base import Mechanism, MechanismKind, NoTransfers
from .sequential_update import SequentialUpdateMechanism
from .shapley import DEFAULT_MAX_SHAPLEY_AGENTS, ShapleyAveragedMechanism
from .unbalanced_team import UnbalancedTeamMechanism

logger = structlog.get_logger()


class MechanismFactory:
    """
    Factory for transfer rules.

    Design Pattern: Factory Method
    """

    @staticmethod
    def parse_kind(kind: Union[str, MechanismKind]) -> MechanismKind:
        if isinstance(kind, MechanismKind):
            return kind
        try:
            return MechanismKind(kind.lower())
        except ValueError:
            known = ", ".join(member.value for member in MechanismKind)
            raise ValidationError(f"Unknown mechanism {kind!r} (known: {known})", mechanism=kind) from None

    @staticmethod
    def create(
        kind: Union[str, MechanismKind],
        spec: GameSpec,
        policy: Optional[DecisionPolicy] = None,
        order: Optional[Sequence[str]] = None,
        max_shapley_agents: int = DEFAULT_MAX_SHAPLEY_AGENTS,
    ) -> Mechanism:
        """
        Create a mechanism.

        Args:
            kind: Mechanism kind or its name ("balanced", "sequential", ...)
            spec: Validated game
            policy: Efficient policy to share (computed when omitted)
            order: Update order for the sequential rule (declaration order by default)
            max_shapley_agents: Agent cap for Shapley averaging

        Raises:
            ValidationError: Unknown kind, or an order given to another rule
        """
        kind = MechanismFactory.parse_kind(kind)
        if order is not None and kind != MechanismKind.SEQUENTIAL_UPDATE:
            raise ValidationError(f"An update order only applies to the sequential rule, not {kind.value}")

        if kind == MechanismKind.BALANCED_TEAM:
            mechanism: Mechanism = BalancedTeamMechanism(spec, policy)
        elif kind == MechanismKind.SEQUENTIAL_UPDATE:
            mechanism = SequentialUpdateMechanism(spec, policy, order)
        elif kind == MechanismKind.SHAPLEY_AVERAGED:
            mechanism = ShapleyAveragedMechanism(spec, policy, max_shapley_agents)
        elif kind == MechanismKind.UNBALANCED_TEAM:
            mechanism = UnbalancedTeamMechanism(spec, policy)
        else:
            mechanism = NoTransfers(spec, policy)

        logger.info("mechanism_created", mechanism=mechanism.name, scenario=spec.name)
        return mechanism
