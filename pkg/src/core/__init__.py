"""
Game Core - dynamic stochastic reporting games with exact probabilities.
"""

from .errors import (
    CertificateFailure,
    DanglingKernelEntry,
    HypothesisViolated,
    MissingUtility,
    NonUnitDistribution,
    ParseError,
    ProfileShapeMismatch,
    ResourceLimitExceeded,
    TallyError,
    UnboundScriptReference,
    UndefinedKernelEntry,
    UnreachableObservation,
    ValidationError,
)
from .game_spec import (
    EXTERNAL_PAYER,
    DecisionSpace,
    GameSpec,
    KernelRow,
    MartingaleViolation,
    UtilityRule,
    check_martingale_annotations,
    successors,
    validate,
)
from .rational import Rat, format_percent, format_rat, parse_rat
from .types import (
    NO_DECISION,
    PUBLIC_AGENT,
    WILDCARD,
    Action,
    AgentType,
    Distribution,
    matches_pattern,
)

__all__ = [
    "Action",
    "AgentType",
    "CertificateFailure",
    "DanglingKernelEntry",
    "DecisionSpace",
    "Distribution",
    "EXTERNAL_PAYER",
    "GameSpec",
    "HypothesisViolated",
    "KernelRow",
    "MartingaleViolation",
    "MissingUtility",
    "NO_DECISION",
    "NonUnitDistribution",
    "PUBLIC_AGENT",
    "ParseError",
    "ProfileShapeMismatch",
    "Rat",
    "ResourceLimitExceeded",
    "TallyError",
    "UnboundScriptReference",
    "UndefinedKernelEntry",
    "UnreachableObservation",
    "UtilityRule",
    "ValidationError",
    "WILDCARD",
    "check_martingale_annotations",
    "format_percent",
    "format_rat",
    "matches_pattern",
    "parse_rat",
    "successors",
    "validate",
]
