"""
Mechanisms - transfer rules priced through the trustful value table.
"""

from .balanced_team import BalancedTeamMechanism, balanced_gamma, balanced_round, balanced_settle
from .base import (
    Mechanism,
    MechanismKind,
    NoTransfers,
    Payment,
    RoundTransfers,
    TransferLedger,
    net_from_payments,
)
from .factory import MechanismFactory
from .sequential_update import SequentialUpdateMechanism, step_payments
from .shapley import ShapleyAveragedMechanism, shapley_weight
from .unbalanced_team import UnbalancedTeamMechanism

__all__ = [
    "BalancedTeamMechanism",
    "Mechanism",
    "MechanismFactory",
    "MechanismKind",
    "NoTransfers",
    "Payment",
    "RoundTransfers",
    "SequentialUpdateMechanism",
    "ShapleyAveragedMechanism",
    "TransferLedger",
    "UnbalancedTeamMechanism",
    "balanced_gamma",
    "balanced_round",
    "balanced_settle",
    "net_from_payments",
    "shapley_weight",
    "step_payments",
]
