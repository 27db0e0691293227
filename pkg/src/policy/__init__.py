"""
Policy - efficient decisions by backward induction and trustful value functionals.
"""

from .efficient_policy import (
    DEFAULT_MAX_POLICY_STATES,
    DecisionPolicy,
    PolicyEntry,
    ValueTable,
    compute_efficient_policy,
    upsilon,
)

__all__ = [
    "DEFAULT_MAX_POLICY_STATES",
    "DecisionPolicy",
    "PolicyEntry",
    "ValueTable",
    "compute_efficient_policy",
    "upsilon",
]
