"""
Test Suite for the Game Model

Covers:
1. Exact rational parsing and display
2. Distribution invariants
3. Validation fault injection (kernel, utilities, structure)
4. Multi-round transition probabilities
5. Martingale annotations of the built-in chains
"""

from dataclasses import replace
from fractions import Fraction

import pytest

from src.core import (
    AgentType,
    DanglingKernelEntry,
    DecisionSpace,
    Distribution,
    GameSpec,
    KernelRow,
    MissingUtility,
    NonUnitDistribution,
    ParseError,
    TallyError,
    UtilityRule,
    ValidationError,
    check_martingale_annotations,
    format_percent,
    format_rat,
    parse_rat,
    successors,
    validate,
)
from src.scenarios import build_appendix_a, build_appendix_b, build_example1


def tiny_spec(**overrides) -> GameSpec:
    """Two rounds, one agent drawing lo/hi uniformly each round."""
    spec = GameSpec(
        name="tiny",
        horizon=2,
        agents=("a",),
        types=(
            AgentType("a", 0, "s0"),
            AgentType("a", 1, "lo"),
            AgentType("a", 1, "hi"),
            AgentType("a", 2, "lo2"),
            AgentType("a", 2, "hi2"),
        ),
        kernel=(
            KernelRow("a", Distribution.uniform(("lo", "hi")), round=1),
            KernelRow("a", Distribution.uniform(("lo2", "hi2")), round=2),
        ),
        decisions=(DecisionSpace(2, public=("go", "stop")),),
        utilities=(UtilityRule("a", Fraction(1), round=2, public_decision="go", types=(("a", "hi2"),)),),
    )
    return replace(spec, **overrides)


class TestRationals:
    """Exact rational parsing."""

    @pytest.mark.parametrize(
        "text, expected",
        [
            ("3", Fraction(3)),
            ("-10", Fraction(-10)),
            ("5/6", Fraction(5, 6)),
            ("0.25", Fraction(1, 4)),
            ("30%", Fraction(3, 10)),
            ("12.5%", Fraction(1, 8)),
        ],
    )
    def test_parse_forms(self, text, expected):
        assert parse_rat(text) == expected

    def test_decimal_is_exact(self):
        """0.1 is read as 1/10, never through binary floating point."""
        assert parse_rat("0.1") == Fraction(1, 10)

    def test_zero_denominator(self):
        with pytest.raises(ParseError, match="Zero denominator"):
            parse_rat("1/0")

    def test_garbage(self):
        with pytest.raises(ParseError, match="Expected a rational"):
            parse_rat("three")

    def test_parse_error_is_value_error(self):
        with pytest.raises(ValueError):
            parse_rat("1//2")

    def test_format(self):
        assert format_rat(Fraction(5, 6)) == "5/6"
        assert format_rat(Fraction(4)) == "4"
        assert format_rat(Fraction(2, 3), decimal=3) == "0.667"

    def test_format_percent(self):
        assert format_percent(Fraction(3, 10)) == "30%"


class TestErrors:
    """Error hierarchy carries context."""

    def test_context_round_trip(self):
        error = ValidationError("bad thing", agent="blue", round=2)
        assert error.context == {"agent": "blue", "round": 2}
        assert error.to_dict()["agent"] == "blue"
        assert isinstance(error, TallyError)

    def test_parse_error_location(self):
        error = ParseError("Unexpected token", line=3, column=7)
        assert str(error) == "Unexpected token (line 3, column 7)"
        assert error.message == "Unexpected token"

    def test_parse_error_column_only(self):
        assert str(ParseError("Unexpected token", column=4)) == "Unexpected token (column 4)"


class TestDistribution:
    """Distribution weights are exact and sum to one."""

    def test_weights_above_one(self):
        with pytest.raises(NonUnitDistribution, match="sum to 1"):
            Distribution((("x", Fraction(7, 6)),))

    def test_weights_split_above_one(self):
        with pytest.raises(NonUnitDistribution):
            Distribution((("x", Fraction(1, 2)), ("y", Fraction(2, 3))))

    def test_negative_weight(self):
        with pytest.raises(NonUnitDistribution, match="Negative weight"):
            Distribution((("x", Fraction(3, 2)), ("y", Fraction(-1, 2))))

    def test_duplicate_outcome(self):
        with pytest.raises(ValidationError, match="Duplicate outcome"):
            Distribution((("x", Fraction(1, 2)), ("x", Fraction(1, 2))))

    def test_uniform_and_expectation(self):
        distribution = Distribution.uniform(("a", "b", "c"))
        assert distribution.probability("b") == Fraction(1, 3)
        assert distribution.probability("z") == 0
        values = {"a": Fraction(3), "b": Fraction(0), "c": Fraction(6)}
        assert distribution.expectation(lambda outcome: values[outcome]) == 3

    def test_point(self):
        assert Distribution.point("only").is_point()


class TestValidation:
    """Fault injection on a minimal game."""

    def test_valid_spec_passes(self):
        spec = tiny_spec()
        assert validate(spec) is spec

    def test_unknown_outcome(self):
        spec = tiny_spec(kernel=(
            KernelRow("a", Distribution.point("zz"), round=1),
            KernelRow("a", Distribution.uniform(("lo2", "hi2")), round=2),
        ))
        with pytest.raises(DanglingKernelEntry, match="unknown round-1 types"):
            validate(spec)

    def test_unknown_source(self):
        spec = tiny_spec(kernel=tiny_spec().kernel + (
            KernelRow("a", Distribution.point("lo2"), round=2, source="nowhere"),
        ))
        with pytest.raises(DanglingKernelEntry, match="unknown type"):
            validate(spec)

    def test_uncovered_context(self):
        """A round-2 row only for source 'lo' leaves 'hi' without a kernel entry."""
        spec = tiny_spec(kernel=(
            KernelRow("a", Distribution.uniform(("lo", "hi")), round=1),
            KernelRow("a", Distribution.point("lo2"), round=2, source="lo"),
        ))
        with pytest.raises(DanglingKernelEntry):
            validate(spec)

    def test_kernel_for_unknown_agent(self):
        spec = tiny_spec(kernel=tiny_spec().kernel + (KernelRow("ghost", Distribution.point("lo"), round=1),))
        with pytest.raises(DanglingKernelEntry, match="unknown agent"):
            validate(spec)

    def test_utility_for_unknown_agent(self):
        spec = tiny_spec(utilities=(UtilityRule("ghost", Fraction(1)),))
        with pytest.raises(MissingUtility, match="unknown agent"):
            validate(spec)

    def test_utility_unknown_decision(self):
        spec = tiny_spec(utilities=(UtilityRule("a", Fraction(1), round=2, public_decision="launch"),))
        with pytest.raises(MissingUtility, match="matches no public decision"):
            validate(spec)

    def test_utility_unknown_type(self):
        spec = tiny_spec(utilities=(UtilityRule("a", Fraction(1), types=(("a", "medium"),)),))
        with pytest.raises(MissingUtility, match="unknown type"):
            validate(spec)

    def test_duplicate_agents(self):
        with pytest.raises(ValidationError, match="unique"):
            validate(tiny_spec(agents=("a", "a")))

    def test_negative_round(self):
        with pytest.raises(ValidationError, match="non-negative"):
            AgentType("a", -1, "lo")

    def test_annotation_range(self):
        with pytest.raises(ValidationError, match=r"\[0, 1\]"):
            AgentType("a", 1, "lo", Fraction(3, 2))


class TestGameQueries:
    """Indexes, decisions and utilities."""

    def test_actions_enumerate_public_decisions(self):
        spec = validate(tiny_spec())
        assert [action.public for action in spec.actions(2)] == ["go", "stop"]

    def test_utility_requires_decision_and_type(self):
        spec = validate(tiny_spec())
        go, stop = spec.actions(2)
        assert spec.utility(2, go, ("-", "hi2")) == (Fraction(1),)
        assert spec.utility(2, stop, ("-", "hi2")) == (Fraction(0),)
        assert spec.utility(2, go, ("-", "lo2")) == (Fraction(0),)

    def test_profile_positions(self):
        spec = build_example1().spec
        assert spec.profile_position("blue") == spec.agent_position("blue") + 1
        assert spec.initial_profile()[0] == spec.labels("public", 0)[0]

    def test_unknown_agent(self):
        with pytest.raises(ValidationError, match="Unknown agent"):
            validate(tiny_spec()).agent_position("nobody")

    def test_lookups_leave_spec_unchanged(self):
        spec = validate(tiny_spec())
        public = spec.initial_profile()[0]
        first = spec.successor_distribution("a", 1, "s0", public, spec.sentinel_action())
        hits = spec._kernel_lookup.cache_info().hits
        assert spec.successor_distribution("a", 1, "s0", public, spec.sentinel_action()) == first
        assert spec._kernel_lookup.cache_info().hits == hits + 1
        assert spec.actions(2) is spec.actions(2)
        assert spec == tiny_spec()
        assert hash(spec) == hash(tiny_spec())


class TestTransitions:
    """Multi-round transition probabilities."""

    def test_lattice_three_quarters(self):
        """From 30% in round 1 the 10% level of round 3 is reached with probability 3/4."""
        spec = build_appendix_a().spec
        assert spec.transition_probability("blue", 1, "b1:30%", 3, "b3:10%") == Fraction(3, 4)
        assert spec.transition_probability("blue", 1, "b1:30%", 3, "b3:90%") == Fraction(1, 4)

    def test_one_step_successors(self):
        spec = build_appendix_a().spec
        step = successors(spec, spec.type_of("blue", 1, "b1:30%"), spec.type_of("public", 1, "-"))
        assert sum(weight for _, weight in step.items()) == 1
        expected = sum(weight * agent_type.annotation for agent_type, weight in step.items())
        assert expected == Fraction(3, 10)

    def test_backwards_target(self):
        spec = build_appendix_a().spec
        with pytest.raises(ValidationError, match="precedes"):
            spec.transition_probability("blue", 2, "b2:20%", 1, "b1:30%")


class TestMartingaleAnnotations:
    """Built-in probability chains keep their annotations in expectation."""

    @pytest.mark.parametrize(
        "scenario",
        [
            build_example1(),
            build_example1(K=3, process_variant="staggered"),
            build_example1(K=4, process_variant="lattice"),
            build_appendix_a(),
            build_appendix_b(),
        ],
        ids=["example1", "staggered", "lattice", "appendix-a", "appendix-b"],
    )
    def test_no_violations(self, scenario):
        assert check_martingale_annotations(scenario.spec) == []

    def test_broken_annotation_reported(self):
        spec = tiny_spec(types=(
            AgentType("a", 0, "s0", Fraction(1, 2)),
            AgentType("a", 1, "lo", Fraction(0)),
            AgentType("a", 1, "hi", Fraction(9, 10)),
            AgentType("a", 2, "lo2"),
            AgentType("a", 2, "hi2"),
        ))
        violations = check_martingale_annotations(validate(spec))
        assert len(violations) == 1
        assert violations[0].agent == "a"
