"""
Four-Round Lattice Counterexample

The YES/NO team game with utilities (84 or 104, 84 or 104, -204) on the
four-round lattice, decorated with punishment decisions that make
truthful reports strictly optimal in the marked rounds:
- round 2: public "b2:20%" / "b2:80%", Blue is punished on a mismatch
- round 3: public "r3:10%" / "r3:90%", Red is punished on a mismatch
- round 4: public "<blue guess>|<red guess>|YES/NO", both are punished on
  a mismatch of their component

What is left to decide are Blue's round-1 and round-3 reports and Red's
round-2 report. The reduced strategy sets fix Blue's round-3 answer to the
opposite of Red's round-2 report and vary the remaining choice.

Tenet #5: Make Illegal States Unrepresentable - the punishment is stored
exactly, so strict dominance stays exact
"""

from fractions import Fraction
from itertools import product
from typing import List

import structlog

from src.core.errors import ValidationError
from src.core.game_spec import DecisionSpace, GameSpec, UtilityRule, validate
from src.mechanisms.base import MechanismKind
from src.orchestrator.outcome import PayoffMeasure
from src.strategies.base import StrategySet, TruthfulStrategy
from src.strategies.scripted import compile_script

from .chains import NO, YES, idle_chain, probability_chain
from .example1 import (
    BLUE,
    BLUE_LATTICE,
    LARGE_UTILITIES,
    LATTICE_HORIZON,
    RED,
    RED_LATTICE,
    agent_names,
    final_round_utilities,
    price_coefficient,
)
from .scenario import TRUTHFUL_PROFILE, Scenario, ScenarioKind, cell_profiles

logger = structlog.get_logger()

PUNISHMENT = Fraction(-(10**42))
NORMALIZATION = Fraction(1, 3)

BLUE_GUESSES_2 = ("b2:20%", "b2:80%")
RED_GUESSES_3 = ("r3:10%", "r3:90%")
BLUE_GUESSES_4 = ("b4:0%", "b4:100%")
RED_GUESSES_4 = ("r4:0%", "r4:100%")

BLUE_ROUND3 = "round 3 => if report[red@2] == r2:20% then b3:90% else b3:10%"

BLUE_SCRIPTS = (
    ("honest", BLUE_ROUND3),
    ("opposite", f"round 1 => if type[1] == b1:30% then b1:70% else b1:30%; {BLUE_ROUND3}"),
    ("always-70", f"round 1 => b1:70%; {BLUE_ROUND3}"),
    ("always-30", f"round 1 => b1:30%; {BLUE_ROUND3}"),
)
RED_SCRIPTS = (
    ("oppose-blue", "round 2 => if report[blue@1] == b1:30% then r2:80% else r2:20%"),
    ("prefer-high", "round 2 => if report[blue@1] == b1:70% and type[2] == r2:20% then r2:20% else r2:80%"),
    ("prefer-low", "round 2 => if report[blue@1] == b1:30% and type[2] == r2:80% then r2:80% else r2:20%"),
)
RED_HONEST = "honest"

PEEK = "peek"
BLUE_PEEK = "round 3 => if type[red@2] == r2:20% then b3:90% else b3:10%"
RED_PEEK = "round 2 => if type[blue@1] == b1:30% then r2:80% else r2:20%"

TABLE_SIZES = (2, 4)


def _punishments() -> List[UtilityRule]:
    rules = []
    for guess, truth in product(BLUE_GUESSES_2, BLUE_GUESSES_2):
        if guess != truth:
            rules.append(UtilityRule(BLUE, PUNISHMENT, 2, guess, types=((BLUE, truth),)))
    for guess, truth in product(RED_GUESSES_3, RED_GUESSES_3):
        if guess != truth:
            rules.append(UtilityRule(RED, PUNISHMENT, 3, guess, types=((RED, truth),)))
    for guess, truth in product(BLUE_GUESSES_4, BLUE_GUESSES_4):
        if guess != truth:
            rules.append(UtilityRule(BLUE, PUNISHMENT, 4, f"{guess}|*|*", types=((BLUE, truth),)))
    for guess, truth in product(RED_GUESSES_4, RED_GUESSES_4):
        if guess != truth:
            rules.append(UtilityRule(RED, PUNISHMENT, 4, f"*|{guess}|*", types=((RED, truth),)))
    return rules


def lattice_decisions() -> tuple:
    final = tuple(
        f"{blue}|{red}|{answer}"
        for blue, red, answer in product(BLUE_GUESSES_4, RED_GUESSES_4, (YES, NO))
    )
    return (
        DecisionSpace(2, BLUE_GUESSES_2),
        DecisionSpace(3, RED_GUESSES_3),
        DecisionSpace(4, final),
    )


def build_appendix_a(n: int = 3, revealed: bool = False, table_size: int = 4) -> Scenario:
    """
    Build the four-round lattice counterexample.

    Args:
        n: Number of agents (at least 3)
        revealed: Let Blue and Red observe each other's past true types
                  (adds the "peek" strategies)
        table_size: 4 for the full reduced game, 2 for the symmetric one

    Registered strategies:
        Blue: honest, opposite, always-70, always-30 (round 3 always
              opposes Red's round-2 report)
        Red: honest, oppose-blue, prefer-high, prefer-low

    Example:
        scenario = build_appendix_a(3)
        nf = induced_normal_form(scenario.spec, BalancedTeamMechanism(scenario.spec),
                                 scenario.table_sets(), PayoffMeasure.GAMMA, normalization=Fraction(1, 3))
    """
    if n < 3:
        raise ValidationError(f"The lattice counterexample needs n >= 3, got {n}")
    if table_size not in TABLE_SIZES:
        raise ValidationError(f"Table size must be one of {TABLE_SIZES}, got {table_size}")

    agents = agent_names(n)
    types, kernel = [], []
    for agent, prefix, levels in ((BLUE, "b", BLUE_LATTICE), (RED, "r", RED_LATTICE)):
        agent_types, rows = probability_chain(agent, prefix, levels)
        types += agent_types
        kernel += rows
    for agent in agents[2:]:
        agent_types, rows = idle_chain(agent, LATTICE_HORIZON)
        types += agent_types
        kernel += rows

    utilities = _punishments() + final_round_utilities(
        agents, types, LATTICE_HORIZON, LARGE_UTILITIES, pattern=f"*|*|{YES}"
    )
    spec = validate(
        GameSpec(
            name=f"appendixA-n{n}" + ("-revealed" if revealed else ""),
            horizon=LATTICE_HORIZON,
            agents=agents,
            types=tuple(types),
            kernel=tuple(kernel),
            decisions=lattice_decisions(),
            utilities=tuple(utilities),
            revelations=((BLUE, RED), (RED, BLUE)) if revealed else (),
            description=(
                "Four-round lattice counterexample with punishment decisions, "
                "utilities (84 or 104, 84 or 104, -204)"
            ),
        )
    )

    blue = [compile_script(spec, BLUE, script, name) for name, script in BLUE_SCRIPTS]
    red = [TruthfulStrategy(RED, RED_HONEST)] + [
        compile_script(spec, RED, script, name) for name, script in RED_SCRIPTS
    ]
    if revealed:
        blue.append(compile_script(spec, BLUE, BLUE_PEEK, PEEK))
        red.append(compile_script(spec, RED, RED_PEEK, PEEK))
    library = (StrategySet(BLUE, tuple(blue)), StrategySet(RED, tuple(red)))

    full_table = (
        (BLUE, tuple(name for name, _ in BLUE_SCRIPTS)),
        (RED, (RED_HONEST,) + tuple(name for name, _ in RED_SCRIPTS)),
    )
    table = tuple((agent, names[:table_size]) for agent, names in full_table)
    profiles = ((TRUTHFUL_PROFILE, ()),) + cell_profiles(full_table)
    if revealed:
        profiles += ((PEEK, ((BLUE, PEEK), (RED, PEEK))),)

    scenario = Scenario(
        spec=spec,
        kind=ScenarioKind.APPENDIX_A,
        parameters=(("n", str(n)), ("revealed", str(revealed).lower()), ("table_size", str(table_size))),
        library=library,
        table=table,
        profiles=profiles,
        coefficient=price_coefficient(n, LARGE_UTILITIES),
        normalization=NORMALIZATION,
        measure=PayoffMeasure.GAMMA,
        mechanism=MechanismKind.BALANCED_TEAM,
        notes=(
            "Cells are 1/3 of the expected report prices (E gamma^blue, E gamma^red).",
            "Rows 3-4 x columns 3-4 evaluate to (0,0),(4,2) / (4,2),(0,0): when Blue always claims 70% "
            "the prefer-high Red reports truthfully on every path, so Blue collects no report price. "
            "The commonly quoted table lists (1,0),(3,2) / (3,2),(1,0) there.",
        ),
    )
    logger.info("scenario_built", scenario=spec.name, agents=len(agents), horizon=LATTICE_HORIZON)
    return scenario


def reduced_game_sets(scenario: Scenario, size: int = 4) -> List[StrategySet]:
    """First `size` registered strategies of Blue and Red (2 gives the symmetric game)."""
    if size not in TABLE_SIZES:
        raise ValidationError(f"Reduced game size must be one of {TABLE_SIZES}, got {size}")
    sets = scenario.sets_by_agent()
    return [StrategySet(agent, sets[agent].strategies[:size]) for agent in (BLUE, RED)]
