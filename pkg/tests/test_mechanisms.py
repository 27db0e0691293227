"""
Test Suite for the Transfer Rules

Covers:
1. Balanced team pricing and settlement
2. Sequential update steps and their override hook
3. Shapley averaging over update orders
4. The externally financed team rule
5. Factory construction and argument errors
"""

from fractions import Fraction
from math import comb

import pytest

from src.core import ResourceLimitExceeded, ValidationError
from src.mechanisms import (
    BalancedTeamMechanism,
    MechanismFactory,
    MechanismKind,
    NoTransfers,
    Payment,
    SequentialUpdateMechanism,
    ShapleyAveragedMechanism,
    UnbalancedTeamMechanism,
    balanced_round,
    balanced_settle,
    net_from_payments,
    shapley_weight,
    step_payments,
)
from src.orchestrator import enumerate_paths
from src.scenarios import build_collusion, build_example1


def annotation(spec, agent, round_index, profile):
    return spec.annotation(agent, round_index, profile[spec.profile_position(agent)])


@pytest.fixture(scope="module")
def example_k4():
    return build_example1(K=4, n=3)


@pytest.fixture(scope="module")
def balanced_k4(example_k4):
    return BalancedTeamMechanism(example_k4.spec)


class TestBalancedSettlement:
    """Every report price is shared by the other agents."""

    def test_settle_three_agents(self):
        ledger = balanced_settle(("a", "b", "c"), [(3, 0, 0)])
        assert ledger.totals == (Fraction(3), Fraction(-3, 2), Fraction(-3, 2))
        assert ledger.rounds[0].budget_sum == 0

    def test_settle_two_rounds(self):
        ledger = balanced_settle(("a", "b"), [(1, 0), (0, 2)])
        assert ledger.totals == (Fraction(-1), Fraction(1))
        assert ledger.gamma_totals == (Fraction(1), Fraction(2))

    def test_needs_two_agents(self):
        with pytest.raises(ValidationError, match="at least two agents"):
            balanced_round(("solo",), 1, (Fraction(1),))

    def test_payment_rows_and_frame(self):
        ledger = balanced_settle(("a", "b", "c"), [(3, 0, 0)])
        assert ledger.payment_rows() == [(1, "b", "a", Fraction(3, 2)), (1, "c", "a", Fraction(3, 2))]
        frame = ledger.to_frame()
        assert list(frame.columns) == ["round", "payer", "payee", "amount"]
        assert len(frame) == 2

    def test_net_from_payments(self):
        payments = [Payment("b", "a", Fraction(2)), Payment("a", "c", Fraction(1, 2))]
        assert net_from_payments(("a", "b", "c"), payments) == (Fraction(3, 2), Fraction(-2), Fraction(1, 2))


class TestBalancedPrices:
    """Report prices of the YES/NO team game with utilities (1, 4, -6)."""

    def test_alternating_prices(self, example_k4, balanced_k4):
        """HIGH in odd rounds, LOW in even rounds."""
        expected = {1: Fraction(-1, 2), 2: Fraction(2), 3: Fraction(0), 4: Fraction(2)}
        spec = example_k4.spec
        paths = list(enumerate_paths(spec, balanced_k4, example_k4.profile("alternating")))
        assert paths
        for path in paths:
            for transfers in path.ledger.rounds:
                for agent in ("blue", "red"):
                    assert transfers.gamma[spec.agent_position(agent)] == expected[transfers.round]

    def test_price_formula_on_truthful_paths(self, example_k4, balanced_k4):
        """gamma^blue_t = 2 * red_{t-1} * (blue_{t-1} - blue_t) on reported annotations."""
        spec = example_k4.spec
        for path in enumerate_paths(spec, balanced_k4, example_k4.profile()):
            for t in range(1, spec.horizon + 1):
                previous, current = path.reports[t - 1], path.reports[t]
                expected = (
                    2
                    * annotation(spec, "red", t - 1, previous)
                    * (annotation(spec, "blue", t - 1, previous) - annotation(spec, "blue", t, current))
                )
                assert path.ledger.rounds[t - 1].gamma[spec.agent_position("blue")] == expected

    def test_budget_balanced_every_round(self, example_k4, balanced_k4):
        for path in enumerate_paths(example_k4.spec, balanced_k4, example_k4.profile("alternating")):
            assert all(transfers.budget_sum == 0 for transfers in path.ledger.rounds)

    def test_passive_agent_has_no_price(self, example_k4, balanced_k4):
        green = example_k4.spec.agent_position("green")
        for path in enumerate_paths(example_k4.spec, balanced_k4, example_k4.profile()):
            assert path.ledger.gamma_totals[green] == 0


class TestSequentialUpdate:
    """Each report is priced by everybody it moves."""

    def test_step_payments(self):
        payments = step_payments("blue", {"red": Fraction(15), "green": Fraction(-5), "blue": Fraction(9)})
        assert payments == (Payment("red", "blue", Fraction(15)), Payment("green", "blue", Fraction(-5)))

    def test_name_lists_order(self):
        spec = build_example1().spec
        assert SequentialUpdateMechanism(spec, order=("red", "blue", "green")).name == "sequential(red,blue,green)"

    def test_order_must_be_permutation(self):
        spec = build_example1().spec
        with pytest.raises(ValidationError, match="permutation"):
            SequentialUpdateMechanism(spec, order=("red", "blue"))

    def test_budget_balanced(self, example_k4):
        mechanism = SequentialUpdateMechanism(example_k4.spec)
        for path in enumerate_paths(example_k4.spec, mechanism, example_k4.profile("alternating")):
            assert all(transfers.budget_sum == 0 for transfers in path.ledger.rounds)

    @pytest.mark.parametrize("K", [2, 3])
    def test_two_agent_coincidence(self, K):
        """With two agents and a staggered process both rules settle the same amounts."""
        scenario = build_example1(K=K, n=2, process_variant="staggered")
        spec = scenario.spec
        policy = BalancedTeamMechanism(spec).policy
        balanced = BalancedTeamMechanism(spec, policy)
        sequential = SequentialUpdateMechanism(spec, policy)
        for path in enumerate_paths(spec, balanced, scenario.profile()):
            other = sequential.ledger(path.reports)
            for mine, theirs in zip(path.ledger.rounds, other.rounds):
                assert mine.net == theirs.net

    def test_step_hook_is_used(self, example_k4):
        class Skimming(SequentialUpdateMechanism):
            def step_payments_for(self, round_index, previous, before, agent, label):
                payments = super().step_payments_for(round_index, previous, before, agent, label)
                if agent == "red":
                    payments += (Payment("red", "green", Fraction(1)),)
                return payments

        spec = example_k4.spec
        mechanism = Skimming(spec)
        reports = next(iter(enumerate_paths(spec, mechanism, example_k4.profile()))).reports
        honest = SequentialUpdateMechanism(spec).ledger(reports)
        skimmed = mechanism.ledger(reports)
        green = spec.agent_position("green")
        assert skimmed.totals[green] - honest.totals[green] == spec.horizon


class TestShapleyAveraged:
    """Sequential payments averaged over all update orders."""

    def test_weights_sum_to_one(self):
        n = 4
        assert sum(comb(n - 1, size) * shapley_weight(size, n) for size in range(n)) == 1
        assert shapley_weight(0, 3) == Fraction(1, 3)
        assert shapley_weight(1, 3) == Fraction(1, 6)

    def test_average_price_formula(self):
        """gamma^blue_t = 100 * (red_{t-1} + red_t)/2 * (blue_{t-1} - blue_t)."""
        scenario = build_example1(K=3, utilities=(84, 104, -204))
        spec = scenario.spec
        mechanism = ShapleyAveragedMechanism(spec)
        blue = spec.agent_position("blue")
        for name in ("truthful", "alternating"):
            for path in enumerate_paths(spec, mechanism, scenario.profile(name)):
                for t in range(1, spec.horizon + 1):
                    previous, current = path.reports[t - 1], path.reports[t]
                    red_average = (annotation(spec, "red", t - 1, previous) + annotation(spec, "red", t, current)) / 2
                    expected = 100 * red_average * (
                        annotation(spec, "blue", t - 1, previous) - annotation(spec, "blue", t, current)
                    )
                    assert path.ledger.rounds[t - 1].gamma[blue] == expected

    def test_alternating_rounds(self):
        scenario = build_example1(K=3, utilities=(84, 104, -204))
        spec = scenario.spec
        mechanism = ShapleyAveragedMechanism(spec)
        blue = spec.agent_position("blue")
        path = next(iter(enumerate_paths(spec, mechanism, scenario.profile("alternating"))))
        assert [transfers.gamma[blue] for transfers in path.ledger.rounds] == [
            Fraction(-75, 2),
            Fraction(50),
            Fraction(-50),
        ]

    def test_agent_limit(self):
        spec = build_example1(n=5).spec
        with pytest.raises(ResourceLimitExceeded, match="exceeds the limit of 4"):
            ShapleyAveragedMechanism(spec, max_agents=4)


class TestUnbalancedTeam:
    """Each agent is paid the others' reported utility by an outside payer."""

    def test_subsidy_recorded(self):
        scenario = build_collusion(k=2)
        spec = scenario.spec
        mechanism = UnbalancedTeamMechanism(spec)
        for path in enumerate_paths(spec, mechanism, scenario.profile("always-1000")):
            for transfers in path.ledger.rounds:
                assert transfers.gamma == (Fraction(1000), Fraction(1000))
                assert transfers.subsidy == 2000
                assert all(payment.payer == "external" for payment in transfers.payments)

    def test_not_budget_balanced(self):
        assert UnbalancedTeamMechanism.budget_balanced is False
        assert BalancedTeamMechanism.budget_balanced is True


class TestMechanismFactory:
    """Factory construction."""

    @pytest.mark.parametrize(
        "kind, expected",
        [
            ("balanced", BalancedTeamMechanism),
            ("sequential", SequentialUpdateMechanism),
            ("shapley", ShapleyAveragedMechanism),
            ("unbalanced", UnbalancedTeamMechanism),
            ("none", NoTransfers),
            (MechanismKind.BALANCED_TEAM, BalancedTeamMechanism),
        ],
    )
    def test_create(self, kind, expected):
        assert isinstance(MechanismFactory.create(kind, build_example1().spec), expected)

    def test_case_insensitive(self):
        assert MechanismFactory.parse_kind("Balanced") == MechanismKind.BALANCED_TEAM

    def test_unknown_kind(self):
        with pytest.raises(ValidationError, match="Unknown mechanism"):
            MechanismFactory.parse_kind("vcg")

    def test_order_only_for_sequential(self):
        with pytest.raises(ValidationError, match="only applies to the sequential rule"):
            MechanismFactory.create("balanced", build_example1().spec, order=("blue", "red", "green"))

    def test_shared_policy(self):
        spec = build_example1().spec
        first = MechanismFactory.create("balanced", spec)
        second = MechanismFactory.create("sequential", spec, policy=first.policy)
        assert second.policy is first.policy

    def test_no_transfers(self):
        spec = build_example1().spec
        transfers = NoTransfers(spec).transfers(1, spec.initial_profile(), spec.initial_profile())
        assert transfers.net == (0, 0, 0)
