"""
Test Suite for Strategies and the Script Language

Covers:
1. Tokenizer and parser errors with column positions
2. Binding errors for references an agent can never observe
3. Evaluation of scripted reports, mixtures and decisions
4. Strategy sets and profiles
"""

from fractions import Fraction

import pytest

from src.core import NonUnitDistribution, ParseError, UnboundScriptReference, ValidationError
from src.scenarios import build_appendix_a, build_yesno
from src.strategies import (
    Observation,
    ObservationPhase,
    StrategyProfile,
    StrategySet,
    TruthfulStrategy,
    compile_script,
    parse_script,
    tokenize,
)


@pytest.fixture(scope="module")
def spec():
    return build_appendix_a().spec


@pytest.fixture(scope="module")
def revealed_spec():
    return build_appendix_a(revealed=True).spec


def report_observation(spec, agent, own_types, reports):
    return Observation(
        agent=agent,
        round=len(own_types) - 1,
        phase=ObservationPhase.REPORT,
        profile_agents=spec.all_agents,
        own_types=tuple(own_types),
        reports=tuple(reports),
    )


class TestTokenizer:
    def test_columns(self):
        tokens = tokenize("round 2 => truth")
        assert [(token.text, token.column) for token in tokens] == [
            ("round", 1),
            ("2", 7),
            ("=>", 9),
            ("truth", 12),
        ]

    def test_unexpected_character(self):
        with pytest.raises(ParseError, match=r"Unexpected character '!' \(column 12\)") as error:
            tokenize("round 1 => !b")
        assert error.value.column == 12


class TestParser:
    """Grammar violations carry the column of the offending token."""

    def test_rules(self):
        script = parse_script("round 1 => truth; default => truth; decide * => follow")
        assert len(script.rules) == 3

    def test_unknown_rule_head(self):
        with pytest.raises(ParseError, match="Expected 'round', 'default' or 'decide'") as error:
            parse_script("walk 1 => truth")
        assert error.value.column == 1

    def test_duplicate_rule(self):
        with pytest.raises(ParseError, match="Duplicate report rule for round 1") as error:
            parse_script("round 1 => truth; round 1 => truth")
        assert error.value.column == 19

    def test_missing_separator(self):
        with pytest.raises(ParseError, match="Expected ';' between rules"):
            parse_script("round 1 => truth round 2 => truth")

    def test_unexpected_end(self):
        with pytest.raises(ParseError):
            parse_script("round 1 =>")

    def test_bad_reference_head(self):
        with pytest.raises(ParseError, match="Expected 'report' or 'type'"):
            parse_script("round 2 => if belief[red@1] == x then truth else truth")


class TestBinding:
    """References are checked against the game before play."""

    def test_unknown_agent(self, spec):
        with pytest.raises(UnboundScriptReference, match="Unknown agent 'ghost'"):
            compile_script(spec, "blue", "round 2 => if report[ghost@1] == x then truth else truth")

    def test_current_round_report(self, spec):
        with pytest.raises(UnboundScriptReference, match="not observable in round 2"):
            compile_script(spec, "blue", "round 2 => if report[red@2] == r2:20% then truth else truth")

    def test_future_own_type(self, spec):
        with pytest.raises(UnboundScriptReference, match="not observable in round 1"):
            compile_script(spec, "blue", "round 1 => if type[2] == b2:20% then truth else truth")

    def test_unrevealed_type(self, spec):
        with pytest.raises(UnboundScriptReference, match="are not revealed to blue"):
            compile_script(spec, "blue", "round 3 => if type[red@2] == r2:20% then truth else truth")

    def test_revealed_type_allowed(self, revealed_spec):
        strategy = compile_script(
            revealed_spec, "blue", "round 3 => if type[red@2] == r2:20% then b3:90% else truth", "peeker"
        )
        assert strategy.name == "peeker"

    def test_truth_in_decide(self):
        yesno = build_yesno().spec
        with pytest.raises(UnboundScriptReference, match="'truth' is a report"):
            compile_script(yesno, "agent1", "decide * => truth")

    def test_follow_in_report(self, spec):
        with pytest.raises(UnboundScriptReference, match="'follow' is a decision"):
            compile_script(spec, "blue", "round 1 => follow")

    def test_label_not_an_option(self, spec):
        with pytest.raises(UnboundScriptReference, match="is not a report option of blue in round 1"):
            compile_script(spec, "blue", "round 1 => b1:55%")

    def test_round_outside_horizon(self, spec):
        with pytest.raises(UnboundScriptReference, match="outside 1..4"):
            compile_script(spec, "blue", "round 9 => truth")

    def test_unknown_compared_label(self, spec):
        with pytest.raises(UnboundScriptReference, match="is not a round-1 type of red"):
            compile_script(spec, "blue", "round 2 => if report[red@1] == r9:1% then truth else truth")

    def test_mixture_must_sum_to_one(self, spec):
        with pytest.raises(NonUnitDistribution):
            compile_script(spec, "blue", "round 1 => {b1:30% = 1/2, b1:70% = 2/3}")


class TestEvaluation:
    """Scripts evaluated on observations."""

    def test_conditional_on_own_type(self, spec):
        opposite = compile_script(
            spec, "blue", "round 1 => if type[1] == b1:30% then b1:70% else b1:30%", "opposite"
        )
        initial = spec.initial_profile()
        low = report_observation(spec, "blue", (initial[1], "b1:30%"), (initial,))
        high = report_observation(spec, "blue", (initial[1], "b1:70%"), (initial,))
        assert opposite.report(spec, low).support == ("b1:70%",)
        assert opposite.report(spec, high).support == ("b1:30%",)

    def test_rounds_without_rule_are_truthful(self, spec):
        strategy = compile_script(spec, "blue", "round 1 => b1:70%")
        initial = spec.initial_profile()
        observation = report_observation(spec, "blue", (initial[1], "b1:30%", "b2:20%"), (initial, initial))
        assert strategy.report(spec, observation).support == ("b2:20%",)

    def test_mixture(self, spec):
        strategy = compile_script(spec, "blue", "round 1 => {b1:30% = 1/4, b1:70% = 3/4}")
        initial = spec.initial_profile()
        result = strategy.report(spec, report_observation(spec, "blue", (initial[1], "b1:30%"), (initial,)))
        assert result.probability("b1:70%") == Fraction(3, 4)

    def test_random_is_seeded(self, spec):
        first = compile_script(spec, "blue", "default => random 7")
        second = compile_script(spec, "blue", "default => random 7")
        initial = spec.initial_profile()
        observation = report_observation(spec, "blue", (initial[1], "b1:30%"), (initial,))
        assert first.report(spec, observation) == second.report(spec, observation)

    def test_decide_follows_recommendation(self):
        yesno = build_yesno().spec
        strategy = compile_script(yesno, "agent1", "round 1 => truth")
        initial = yesno.initial_profile()
        observation = Observation(
            agent="agent1",
            round=1,
            phase=ObservationPhase.DECIDE,
            profile_agents=yesno.all_agents,
            own_types=(initial[1], "quiet"),
            reports=(initial, initial),
            recommendation="YES",
        )
        assert strategy.decide(yesno, observation).support == ("YES",)


class TestStrategyCollections:
    def test_set_lookup(self):
        strategies = StrategySet("blue", (TruthfulStrategy("blue"), TruthfulStrategy("blue", "honest")))
        assert strategies.names == ("truthful", "honest")
        assert strategies.get("honest").is_truthful

    def test_set_unknown_name(self):
        with pytest.raises(ValidationError, match="Unknown strategy 'nope'"):
            StrategySet("blue", (TruthfulStrategy("blue"),)).get("nope")

    def test_set_duplicate_names(self):
        with pytest.raises(ValidationError, match="must be unique"):
            StrategySet("blue", (TruthfulStrategy("blue"), TruthfulStrategy("blue")))

    def test_set_foreign_strategy(self):
        with pytest.raises(ValidationError, match="belongs to red"):
            StrategySet("blue", (TruthfulStrategy("red"),))

    def test_profile_defaults_to_truthful(self, spec):
        opposite = compile_script(spec, "blue", "round 1 => b1:70%", "always-70")
        profile = StrategyProfile(spec, {"blue": opposite})
        assert profile.for_agent("red").is_truthful
        assert profile.names["blue"] == "always-70"
        assert profile.with_strategy(TruthfulStrategy("blue")).for_agent("blue").is_truthful
        assert "blue=always-70" in profile.describe()

    def test_profile_rejects_misassigned(self, spec):
        with pytest.raises(ValidationError, match="assigned to red"):
            StrategyProfile(spec, {"red": TruthfulStrategy("blue")})
