"""
Tests for budget-balance checks of single ledgers and of every path of a
profile, including the externally financed rule.
"""

from fractions import Fraction
from itertools import permutations

import pytest

from src.analysis import budget_balance_check, budget_balance_over_paths
from src.mechanisms import (
    BalancedTeamMechanism,
    Payment,
    RoundTransfers,
    SequentialUpdateMechanism,
    ShapleyAveragedMechanism,
    TransferLedger,
    UnbalancedTeamMechanism,
)
from src.scenarios import build_appendix_a, build_appendix_b, build_collusion, build_example1, build_yesno

BUILT_IN = {
    "example1": lambda: build_example1(K=2, n=3),
    "appendixA": build_appendix_a,
    "appendixB": build_appendix_b,
    "yesno": lambda: build_yesno(n=3, k=2),
}


@pytest.fixture(scope="module")
def example():
    return build_example1(K=3, n=3)


class TestLedgerCheck:
    def test_balanced_ledger(self):
        ledger = TransferLedger(
            ("a", "b"),
            (RoundTransfers(1, (Fraction(1), Fraction(0)), (Fraction(1), Fraction(-1))),),
            "hand-built",
        )
        verdict = budget_balance_check(ledger)
        assert verdict.passed
        assert verdict.balanced
        assert not verdict.warning

    def test_imbalance_is_reported(self):
        ledger = TransferLedger(
            ("a", "b"),
            (
                RoundTransfers(1, (Fraction(1), Fraction(0)), (Fraction(1), Fraction(0))),
                RoundTransfers(2, (Fraction(0), Fraction(0)), (Fraction(0), Fraction(0))),
            ),
            "hand-built",
        )
        verdict = budget_balance_check(ledger)
        assert not verdict.passed
        assert verdict.violations == ((1, Fraction(1)),)
        assert verdict.to_dict()["violations"] == [{"round": 1, "imbalance": "1"}]

    def test_subsidy_explains_the_sum(self):
        transfers = RoundTransfers(
            1,
            (Fraction(5), Fraction(5)),
            (Fraction(5), Fraction(5)),
            (Payment("external", "a", Fraction(5)), Payment("external", "b", Fraction(5))),
            subsidy=Fraction(10),
        )
        verdict = budget_balance_check(TransferLedger(("a", "b"), (transfers,), "outside"))
        assert verdict.passed
        assert verdict.warning
        assert verdict.subsidy == 10


class TestPathCheck:
    """Every path of a profile settles within the agents."""

    @pytest.mark.parametrize(
        "rule", [BalancedTeamMechanism, SequentialUpdateMechanism, ShapleyAveragedMechanism]
    )
    @pytest.mark.parametrize("profile", ["truthful", "alternating"])
    def test_balanced_rules(self, example, rule, profile):
        verdict = budget_balance_over_paths(example.spec, rule(example.spec), example.profile(profile))
        assert verdict.balanced
        assert verdict.ledgers > 0
        assert verdict.expected_subsidy == 0

    @pytest.mark.parametrize("name", list(BUILT_IN))
    def test_every_update_order_balances(self, name):
        scenario = BUILT_IN[name]()
        assert len(scenario.spec.agents) <= 4
        for order in permutations(scenario.spec.agents):
            mechanism = SequentialUpdateMechanism(scenario.spec, order=order)
            for profile in scenario.profile_names:
                verdict = budget_balance_over_paths(scenario.spec, mechanism, scenario.profile(profile))
                assert verdict.balanced, (order, profile, verdict.to_dict())
                assert verdict.expected_subsidy == 0

    @pytest.mark.parametrize("rule", [BalancedTeamMechanism, ShapleyAveragedMechanism])
    @pytest.mark.parametrize("name", list(BUILT_IN))
    def test_order_free_rules_balance(self, name, rule):
        scenario = BUILT_IN[name]()
        mechanism = rule(scenario.spec)
        for profile in scenario.profile_names:
            assert budget_balance_over_paths(scenario.spec, mechanism, scenario.profile(profile)).balanced

    def test_unbalanced_rule_warns(self):
        scenario = build_collusion(k=3)
        verdict = budget_balance_over_paths(scenario.spec, UnbalancedTeamMechanism(scenario.spec))
        assert verdict.passed
        assert verdict.warning
        assert not verdict.balanced
        assert verdict.expected_subsidy == Fraction(5997, 2)

    def test_colluding_subsidy(self):
        scenario = build_collusion(k=2)
        mechanism = UnbalancedTeamMechanism(scenario.spec)
        verdict = budget_balance_over_paths(scenario.spec, mechanism, scenario.profile("always-1000"))
        assert verdict.subsidy == 4000
        assert verdict.expected_subsidy == 4000
        assert verdict.to_dict()["subsidy_warning"] is True
