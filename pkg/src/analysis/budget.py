"""
Budget Balance

Balanced rules move money between agents only: every round's net
transfers sum to zero. Unbalanced rules may inject money from outside;
for them the round sum must equal the recorded subsidy, and a nonzero
subsidy is flagged rather than failed.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Tuple

import structlog

from src.core.game_spec import GameSpec
from src.mechanisms.base import Mechanism, TransferLedger
from src.orchestrator.play import DEFAULT_MAX_PATHS, enumerate_paths
from src.strategies.base import StrategyProfile

logger = structlog.get_logger()


@dataclass(frozen=True)
class BudgetVerdict:
    """
    Budget check of one or more ledgers.

    Attributes:
        mechanism: Rule that produced the ledgers
        ledgers: Number of ledgers checked
        violations: (round, sum of net transfers minus subsidy) where nonzero
        subsidy: Largest absolute external subsidy over the ledgers
        expected_subsidy: Probability-weighted subsidy (path checks only)
    """
    mechanism: str
    ledgers: int
    violations: Tuple[Tuple[int, Fraction], ...] = ()
    subsidy: Fraction = Fraction(0)
    expected_subsidy: Optional[Fraction] = None

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def balanced(self) -> bool:
        """Zero-sum on every round: no violation and no outside money."""
        return self.passed and self.subsidy == 0

    @property
    def warning(self) -> bool:
        return self.passed and self.subsidy != 0

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "ledgers": self.ledgers,
            "passed": self.passed,
            "balanced": self.balanced,
            "subsidy_warning": self.warning,
            "subsidy": str(self.subsidy),
            "expected_subsidy": None if self.expected_subsidy is None else str(self.expected_subsidy),
            "violations": [{"round": t, "imbalance": str(amount)} for t, amount in self.violations],
        }


def _scan(ledgers: Iterable[TransferLedger]) -> Tuple[int, list, Fraction, str]:
    count = 0
    violations = []
    subsidy = Fraction(0)
    name = ""
    for ledger in ledgers:
        count += 1
        name = ledger.mechanism
        for transfers in ledger.rounds:
            imbalance = transfers.budget_sum - transfers.subsidy
            if imbalance != 0:
                violations.append((transfers.round, imbalance))
        if abs(ledger.subsidy) > abs(subsidy):
            subsidy = ledger.subsidy
    return count, violations, subsidy, name


def budget_balance_check(ledger: TransferLedger) -> BudgetVerdict:
    """
    Check one ledger round by round.

    Example:
        budget_balance_check(mechanism.ledger(path.reports)).balanced
    """
    count, violations, subsidy, name = _scan([ledger])
    verdict = BudgetVerdict(name, count, tuple(violations), subsidy)
    if not verdict.passed:
        logger.warning("budget_violated", mechanism=name, violations=len(violations))
    return verdict


def budget_balance_over_paths(
    spec: GameSpec,
    mechanism: Mechanism,
    profile: Optional[StrategyProfile] = None,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> BudgetVerdict:
    """Check the ledger of every path of play of a profile (truthful by default)."""
    profile = profile or StrategyProfile(spec)
    paths = list(enumerate_paths(spec, mechanism, profile, max_paths))
    count, violations, subsidy, _ = _scan(path.ledger for path in paths)
    expected = sum((path.probability * path.ledger.subsidy for path in paths), Fraction(0))
    verdict = BudgetVerdict(
        mechanism.name,
        count,
        tuple(dict.fromkeys(violations)),
        subsidy,
        expected,
    )
    log = logger.info if verdict.balanced else logger.warning
    log(
        "budget_checked",
        scenario=spec.name,
        mechanism=mechanism.name,
        profile=profile.describe(),
        paths=count,
        passed=verdict.passed,
        subsidy=str(subsidy),
        expected_subsidy=str(expected),
    )
    return verdict
