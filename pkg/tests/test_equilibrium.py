"""
Test Suite for Equilibrium Analysis

Covers:
1. Nash checks of the one-round coordination profiles
2. Profile one breaking once initial probabilities exceed 84%
3. Dominance on the private YES/NO game
4. Payoffs of collusion under the externally financed rule
"""

from fractions import Fraction

import pytest

from src.analysis import DominanceMode, eliminate_dominated, induced_normal_form, nash_check
from src.core import ValidationError
from src.mechanisms import MechanismFactory, UnbalancedTeamMechanism
from src.orchestrator import PayoffMeasure, expected_payoffs
from src.scenarios import build_appendix_b, build_collusion, build_yesno, mixed_low_probability


def mechanism_for(scenario):
    return MechanismFactory.create(scenario.mechanism, scenario.spec)


@pytest.fixture(scope="module")
def coordination():
    return build_appendix_b()


@pytest.fixture(scope="module")
def collusion():
    return build_collusion(k=3)


class TestCoordinationProfiles:
    """Every registered profile of the coordination game at p0 = 1/2."""

    @pytest.mark.parametrize("name", ["zero", "one", "truthful", "mixed-high", "mixed-low"])
    def test_profile_is_nash(self, coordination, name):
        verdict = nash_check(
            coordination.spec,
            mechanism_for(coordination),
            coordination.profile(name),
            sets=coordination.sets_by_agent(),
            agents=("blue", "red"),
        )
        assert verdict.is_nash, verdict.to_dict()
        assert len(verdict.scope) == 2

    def test_profile_names(self, coordination):
        assert coordination.profile_names == ("zero", "one", "truthful", "mixed-high", "mixed-low")

    def test_one_fails_above_threshold(self):
        scenario = build_appendix_b(p0=("9/10", "9/10"), mixed_low=False)
        verdict = nash_check(
            scenario.spec,
            mechanism_for(scenario),
            scenario.profile("one"),
            sets=scenario.sets_by_agent(),
            agents=("blue",),
        )
        assert not verdict.is_nash
        assert all(witness.agent == "blue" for witness in verdict.witnesses)
        assert all(witness.gain > 0 for witness in verdict.witnesses)
        assert {"truthful", "behavioral best response"} <= {witness.deviation for witness in verdict.witnesses}

    def test_mixed_low_needs_threshold(self):
        with pytest.raises(ValidationError, match="p0 <= 84%"):
            build_appendix_b(p0=("9/10", "1/2"))

    def test_mixed_low_probability(self):
        assert mixed_low_probability(Fraction(1, 2)) == Fraction(16, 84)
        assert mixed_low_probability(Fraction(0)) == 0
        assert mixed_low_probability(Fraction(84, 100)) == 1

    @pytest.mark.parametrize(
        "kwargs, message",
        [({"p0": ("1/2",)}, "initial probabilities"), ({"p0": ("3/2", "1/2")}, r"\[0, 1\]")],
    )
    def test_invalid_arguments(self, kwargs, message):
        with pytest.raises(ValidationError, match=message):
            build_appendix_b(**kwargs)


class TestYesNoDominance:
    def test_always_no_is_eliminated(self):
        scenario = build_yesno(n=2, k=2)
        table = induced_normal_form(
            scenario.spec, mechanism_for(scenario), scenario.table_sets(), PayoffMeasure.TOTAL
        )
        reduced, trace = eliminate_dominated(table, DominanceMode.WEAK)
        for names in reduced.strategies:
            assert "always-no" not in names
        assert trace.steps

    def test_answering_yes_together_pays(self):
        scenario = build_yesno(n=2, k=2)
        payoffs = expected_payoffs(scenario.spec, mechanism_for(scenario), scenario.profile("always-yes"))
        assert payoffs.total == (2, 2)

    def test_silence_pays_nothing(self):
        scenario = build_yesno(n=2, k=2)
        payoffs = expected_payoffs(scenario.spec, mechanism_for(scenario), scenario.profile("always-no"))
        assert payoffs.total == (0, 0)


class TestCollusion:
    """Both agents gain by always claiming the high signal."""

    def test_truthful_payoffs(self, collusion):
        payoffs = expected_payoffs(collusion.spec, UnbalancedTeamMechanism(collusion.spec), collusion.profile())
        assert payoffs.total == (Fraction(5997, 2), Fraction(5997, 2))
        assert payoffs.subsidy == Fraction(5997, 2)

    def test_colluding_payoffs(self, collusion):
        payoffs = expected_payoffs(
            collusion.spec, UnbalancedTeamMechanism(collusion.spec), collusion.profile("always-1000")
        )
        assert payoffs.total == (Fraction(8997, 2), Fraction(8997, 2))
        assert payoffs.of("agent1", PayoffMeasure.GAMMA) == 3000

    def test_truthful_is_nash(self, collusion):
        """Alone, neither agent gains by inflating its claim."""
        verdict = nash_check(
            collusion.spec,
            UnbalancedTeamMechanism(collusion.spec),
            collusion.profile(),
            sets=collusion.sets_by_agent(),
            behavioral=False,
        )
        assert verdict.is_nash

    def test_builder(self, collusion):
        assert collusion.spec.agents == ("agent1", "agent2")
        assert collusion.sets_by_agent()["agent1"].names == ("truthful", "always-1000", "trigger")
        assert "trigger" in collusion.profile_names
        with pytest.raises(ValidationError, match="k >= 1"):
            build_collusion(k=0)
