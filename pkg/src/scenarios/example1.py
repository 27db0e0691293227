"""
YES/NO Team Game - two active reporters and passive payers

Blue and Red end the game with a LOW or HIGH final type; in the final round
the public decision is YES or NO. On YES the active agents get the low or
high utility of their final type and Green pays the YES cost; everybody
gets 0 on NO. YES is efficient exactly when both active agents are HIGH.
Further passive agents have zero utility and only share transfers.

With two agents Green is dropped and each active agent bears half of the
YES cost.

Earlier rounds only update types. The intermediate process is selected by
ProcessVariant:
- DEFAULT: HIGH probability 1/2 until the final round, reports may also
  claim the floor (0 by default) or 1
- STAGGERED: like DEFAULT, but Blue's final type is realized one round
  before Red's
- LATTICE: the four-round lattice (b1:30%/70%, b2:20%/80%, ...)

Tenet #3: Explicit Over Clever
"""

from enum import Enum
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

import structlog

from src.core.errors import ValidationError
from src.core.game_spec import DecisionSpace, GameSpec, validate
from src.core.rational import format_rat, parse_rat
from src.mechanisms.base import MechanismKind
from src.orchestrator.outcome import PayoffMeasure
from src.strategies.base import Strategy, StrategySet, TruthfulStrategy
from src.strategies.scripted import compile_script

from .chains import NO, YES, extreme_label, idle_chain, probability_chain, yes_utilities
from .scenario import TRUTHFUL_PROFILE, Scenario, ScenarioKind, cell_profiles

logger = structlog.get_logger()

BLUE = "blue"
RED = "red"
GREEN = "green"
ACTIVE = ((BLUE, "b"), (RED, "r"))

SMALL_UTILITIES = (Fraction(1), Fraction(4), Fraction(-6))
LARGE_UTILITIES = (Fraction(84), Fraction(104), Fraction(-204))

HALF = Fraction(1, 2)

BLUE_LATTICE = (
    (HALF,),
    (Fraction(3, 10), Fraction(7, 10)),
    (Fraction(1, 5), Fraction(4, 5)),
    (Fraction(1, 10), Fraction(9, 10)),
    (Fraction(0), Fraction(1)),
)
RED_LATTICE = (
    (HALF,),
    (HALF,),
    (Fraction(1, 5), Fraction(4, 5)),
    (Fraction(1, 10), Fraction(9, 10)),
    (Fraction(0), Fraction(1)),
)
LATTICE_HORIZON = 4

TRUTHFUL = "truthful"
PUNISH = "punish"
DOUBLE = "double"
ALTERNATING = "alternating"


class ProcessVariant(Enum):
    DEFAULT = "default"
    STAGGERED = "staggered"
    LATTICE = "lattice"


def agent_names(n: int) -> Tuple[str, ...]:
    """Blue, Red, Green, then passive4..passiveN."""
    if n == 2:
        return (BLUE, RED)
    return (BLUE, RED, GREEN) + tuple(f"passive{index}" for index in range(4, n + 1))


def _default_levels(horizon: int, floor: Fraction, final_round: int) -> List[Tuple[Fraction, ...]]:
    levels: List[Tuple[Fraction, ...]] = [(HALF,)]
    for round_index in range(1, horizon + 1):
        if round_index < final_round:
            levels.append((floor, HALF, Fraction(1)))
        else:
            levels.append((Fraction(0), Fraction(1)))
    return levels


def chain_levels(
    variant: ProcessVariant, horizon: int, floor: Fraction
) -> Tuple[Sequence[Sequence[Fraction]], Sequence[Sequence[Fraction]]]:
    """(Blue levels, Red levels) of a process variant."""
    if variant == ProcessVariant.LATTICE:
        return BLUE_LATTICE, RED_LATTICE
    red = _default_levels(horizon, floor, horizon)
    if variant == ProcessVariant.STAGGERED:
        return _default_levels(horizon, floor, horizon - 1), red
    return red, red


def price_coefficient(agents: int, utilities: Sequence[Fraction]) -> Fraction:
    """
    Unit price factor c of the report-price identities.

    It is minus the YES utility of everybody except one HIGH active agent
    when the other active agent is HIGH: 2 for (1, 4, -6), 100 for
    (84, 104, -204).
    """
    _, high, cost = utilities
    if agents == 2:
        return -(high + cost / 2)
    return -(high + cost)


def _parse_utilities(utilities: Sequence[Union[str, int, Fraction]]) -> Tuple[Fraction, Fraction, Fraction]:
    if len(utilities) != 3:
        raise ValidationError(f"Expected (low, high, cost) utilities, got {list(utilities)}")
    low, high, cost = (parse_rat(value) for value in utilities)
    if not low <= high:
        raise ValidationError(f"LOW utility {low} exceeds HIGH utility {high}")
    return low, high, cost


def final_round_utilities(
    agents: Sequence[str],
    types,
    horizon: int,
    utilities: Sequence[Fraction],
    pattern: str = YES,
):
    """Utility rules of the final YES decision for Blue/Red and the payers."""
    low, high, cost = utilities
    active = [
        (agent, extreme_label(types, agent, horizon, False), extreme_label(types, agent, horizon, True))
        for agent, _ in ACTIVE
    ]
    if len(agents) == 2:
        payers = [(BLUE, cost / 2), (RED, cost / 2)]
    else:
        payers = [(GREEN, cost)]
    return yes_utilities(horizon, active, low, high, payers, pattern)


def _library(spec: GameSpec, types) -> Tuple[Tuple[StrategySet, ...], Tuple[str, ...]]:
    horizon = spec.horizon
    sets = []
    for agent, other in ((BLUE, RED), (RED, BLUE)):
        strategies: List[Strategy] = [TruthfulStrategy(agent, TRUTHFUL)]
        if horizon >= 2:
            other_low = extreme_label(types, other, horizon - 1, False)
            own_low = extreme_label(types, agent, horizon - 1, False)
            own_high = extreme_label(types, agent, horizon, True)
            punish = f"round {horizon} => if report[{other}@{horizon - 1}] == {other_low} then {own_high} else truth"
            strategies.append(compile_script(spec, agent, punish, PUNISH))
            strategies.append(compile_script(spec, agent, f"round {horizon - 1} => {own_low}; {punish}", DOUBLE))
        alternating = "; ".join(
            f"round {t} => {extreme_label(types, agent, t, t % 2 == 1)}" for t in range(1, horizon + 1)
        )
        strategies.append(compile_script(spec, agent, alternating, ALTERNATING))
        sets.append(StrategySet(agent, tuple(strategies)))
    table_names = (TRUTHFUL, PUNISH, DOUBLE) if horizon >= 2 else (TRUTHFUL, ALTERNATING)
    return tuple(sets), table_names


def build_example1(
    K: int = 2,
    n: int = 3,
    utilities: Sequence[Union[str, int, Fraction]] = SMALL_UTILITIES,
    process_variant: Union[str, ProcessVariant] = ProcessVariant.DEFAULT,
    floor: Union[str, Fraction] = Fraction(0),
) -> Scenario:
    """
    Build the YES/NO team game.

    Args:
        K: Number of rounds
        n: Number of agents (2 drops Green and splits its cost)
        utilities: (LOW, HIGH, YES cost); (1, 4, -6) or (84, 104, -204)
        process_variant: Intermediate type process
        floor: Lowest intermediate probability a report may claim

    Registered strategies (Blue shown, Red mirrors):
        truthful
        punish: if Red claimed the floor in round K-1, claim HIGH in round K
        double: claim the floor in round K-1, then punish
        alternating: claim HIGH in odd rounds and LOW in even rounds

    Example:
        scenario = build_example1(K=2, n=3)
        scenario.profile("row3xcol3")  # both play "double"
    """
    try:
        variant = ProcessVariant(process_variant)
    except ValueError:
        known = ", ".join(member.value for member in ProcessVariant)
        raise ValidationError(f"Unknown process variant {process_variant!r} (known: {known})") from None
    floor = parse_rat(floor)
    values = _parse_utilities(utilities)
    if K < 1:
        raise ValidationError(f"K must be at least 1, got {K}")
    if n < 2:
        raise ValidationError(f"n must be at least 2, got {n}")
    if not 0 <= floor < HALF:
        raise ValidationError(f"Floor must be in [0, 1/2), got {floor}")
    if variant == ProcessVariant.LATTICE and (K != LATTICE_HORIZON or floor != 0):
        raise ValidationError(f"The lattice process has K = {LATTICE_HORIZON} and no floor")
    if variant == ProcessVariant.STAGGERED and K < 2:
        raise ValidationError(f"The staggered process needs K >= 2, got {K}")

    agents = agent_names(n)
    blue_levels, red_levels = chain_levels(variant, K, floor)
    types, kernel = [], []
    for (agent, prefix), levels in zip(ACTIVE, (blue_levels, red_levels)):
        agent_types, rows = probability_chain(agent, prefix, levels)
        types += agent_types
        kernel += rows
    for agent in agents[2:]:
        agent_types, rows = idle_chain(agent, K)
        types += agent_types
        kernel += rows

    name = f"example1-k{K}-n{n}" + ("" if variant == ProcessVariant.DEFAULT else f"-{variant.value}")
    spec = validate(
        GameSpec(
            name=name,
            horizon=K,
            agents=agents,
            types=tuple(types),
            kernel=tuple(kernel),
            decisions=(DecisionSpace(K, (YES, NO)),),
            utilities=tuple(final_round_utilities(agents, types, K, values)),
            description=(
                f"YES/NO team game, {K} rounds, {n} agents, utilities "
                f"({', '.join(format_rat(v) for v in values)}), {variant.value} process"
            ),
        )
    )

    library, table_names = _library(spec, types)
    table = ((BLUE, table_names), (RED, table_names))
    profiles = ((TRUTHFUL_PROFILE, ()), (ALTERNATING, ((BLUE, ALTERNATING), (RED, ALTERNATING))))
    notes = []
    if K == 2 and variant == ProcessVariant.DEFAULT:
        notes.append(
            "Off-diagonal cells (punish, double) and (double, punish) evaluate to (5/4, 2) and (2, 5/4); "
            "the commonly quoted table lists (2, 2) for both."
        )
    if n == 2:
        notes.append("Two-agent reduction: Green is dropped and each active agent bears half of the YES cost.")

    scenario = Scenario(
        spec=spec,
        kind=ScenarioKind.EXAMPLE1,
        parameters=(
            ("K", str(K)),
            ("n", str(n)),
            ("utilities", ",".join(format_rat(v) for v in values)),
            ("process_variant", variant.value),
            ("floor", format_rat(floor)),
        ),
        library=library,
        table=table,
        profiles=profiles + cell_profiles(table),
        coefficient=price_coefficient(n, values),
        measure=PayoffMeasure.TOTAL,
        mechanism=MechanismKind.BALANCED_TEAM,
        notes=tuple(notes),
    )
    logger.info("scenario_built", scenario=spec.name, agents=len(agents), horizon=K)
    return scenario
