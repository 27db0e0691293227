"""
Scenario Registry - built-in scenarios by name

Every entry names its builder and the builder's parameters with their
defaults as text, so the CLI can pass `--param name=value` overrides
straight through.

Usage:
    scenario = build_scenario("example1", {"K": "3", "n": "5"})
    for entry in available_scenarios():
        print(entry.name, entry.summary)

Design Pattern: Registry
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

import structlog

from src.core.errors import ParseError, ValidationError
from src.core.rational import parse_rat

from .collusion import build_collusion
from .coordination import build_appendix_b
from .counterexample import build_appendix_a
from .example1 import build_example1
from .random_games import random_game
from .scenario import Scenario
from .yes_no import build_yesno

logger = structlog.get_logger()

_TRUE = ("true", "yes", "1", "on")
_FALSE = ("false", "no", "0", "off")


def parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValidationError(f"Expected true or false, got {text!r}")


def parse_int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        raise ValidationError(f"Expected an integer, got {text!r}") from None


def parse_rat_list(text: str) -> Tuple[Fraction, ...]:
    return tuple(parse_rat(part) for part in text.split(","))


@dataclass(frozen=True)
class Parameter:
    """Builder parameter with its textual default."""
    name: str
    parse: Callable[[str], Any]
    default: str
    help: str = ""


@dataclass(frozen=True)
class ScenarioEntry:
    """A registered builder."""
    name: str
    builder: Callable[..., Scenario]
    parameters: Tuple[Parameter, ...]
    summary: str

    def parameter(self, name: str) -> Parameter:
        for parameter in self.parameters:
            if parameter.name == name:
                return parameter
        known = ", ".join(parameter.name for parameter in self.parameters)
        raise ValidationError(f"Unknown parameter {name!r} for {self.name} (known: {known})", parameter=name)

    def defaults(self) -> Dict[str, str]:
        return {parameter.name: parameter.default for parameter in self.parameters}

    def build(self, overrides: Optional[Mapping[str, str]] = None) -> Scenario:
        """Parse every parameter (defaults first, then overrides) and call the builder."""
        texts = self.defaults()
        for name, value in (overrides or {}).items():
            self.parameter(name)
            texts[name] = value
        arguments = {}
        for parameter in self.parameters:
            try:
                arguments[parameter.name] = parameter.parse(texts[parameter.name])
            except ParseError as error:
                raise ValidationError(
                    f"Invalid value {texts[parameter.name]!r} for {self.name} parameter {parameter.name}: {error.message}",
                    parameter=parameter.name,
                ) from error
        return self.builder(**arguments)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "summary": self.summary,
            "parameters": {parameter.name: parameter.default for parameter in self.parameters},
        }


_REGISTRY: Tuple[ScenarioEntry, ...] = (
    ScenarioEntry(
        "example1",
        build_example1,
        (
            Parameter("K", parse_int, "2", "number of rounds"),
            Parameter("n", parse_int, "3", "number of agents"),
            Parameter("utilities", parse_rat_list, "1,4,-6", "LOW, HIGH, YES cost"),
            Parameter("process_variant", str, "default", "default, staggered or lattice"),
            Parameter("floor", parse_rat, "0", "lowest intermediate report"),
        ),
        "YES/NO team game with Blue, Red and a paying Green",
    ),
    ScenarioEntry(
        "appendixA",
        build_appendix_a,
        (
            Parameter("n", parse_int, "3", "number of agents"),
            Parameter("revealed", parse_bool, "false", "Blue and Red see each other's past types"),
            Parameter("table_size", parse_int, "4", "4 for the full reduced game, 2 for the symmetric one"),
        ),
        "Four-round lattice counterexample with punishment decisions",
    ),
    ScenarioEntry(
        "appendixB",
        build_appendix_b,
        (
            Parameter("p0", parse_rat_list, "1/2,1/2", "initial HIGH probabilities of Blue and Red"),
            Parameter("n", parse_int, "3", "number of agents"),
            Parameter("utilities", parse_rat_list, "84,104,-204", "LOW, HIGH, YES cost"),
            Parameter("mixed_low", parse_bool, "true", "register the mixed-low profile"),
        ),
        "One-round coordination game and its five reporting profiles",
    ),
    ScenarioEntry(
        "yesno",
        build_yesno,
        (
            Parameter("n", parse_int, "2", "number of agents"),
            Parameter("k", parse_int, "2", "number of rounds"),
            Parameter("yes_cost", parse_rat, "0", "cost of every YES answer"),
        ),
        "Private YES/NO game",
    ),
    ScenarioEntry(
        "collusion",
        build_collusion,
        (Parameter("k", parse_int, "3", "number of rounds"),),
        "Two-agent collusion game for the unbalanced team rule",
    ),
    ScenarioEntry(
        "random",
        random_game,
        (
            Parameter("seed", parse_int, "0", "generator seed"),
            Parameter("agents", parse_int, "2", "number of agents (1-3)"),
            Parameter("rounds", parse_int, "2", "number of rounds (1-3)"),
            Parameter("types", parse_int, "2", "largest type space (1-3)"),
            Parameter("private_decisions", parse_bool, "true", "give agents private options"),
        ),
        "Seeded random small game",
    ),
)


def available_scenarios() -> List[ScenarioEntry]:
    return list(_REGISTRY)


def scenario_entry(name: str) -> ScenarioEntry:
    """Registry entry by name (case-insensitive)."""
    for entry in _REGISTRY:
        if entry.name.lower() == name.lower():
            return entry
    known = ", ".join(entry.name for entry in _REGISTRY)
    raise ValidationError(f"Unknown scenario {name!r} (known: {known})", scenario=name)


def build_scenario(name: str, overrides: Optional[Mapping[str, str]] = None) -> Scenario:
    """
    Build a registered scenario.

    Args:
        name: Registry name ("example1", "appendixA", ...)
        overrides: Parameter name -> value text

    Raises:
        ValidationError: Unknown scenario or parameter, or invalid values
    """
    entry = scenario_entry(name)
    logger.debug("scenario_requested", scenario=entry.name, overrides=dict(overrides or {}))
    return entry.build(overrides)
