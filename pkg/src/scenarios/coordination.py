"""
One-Round Coordination Game

The YES/NO team game with a single round: Blue and Red start from known
HIGH probabilities p0 and learn a binary final type before their only
report. Registered reporting profiles:

1. zero: always claim LOW
2. one: always claim HIGH (an equilibrium only while both p0 <= 84%)
3. truthful
4. mixed-high: LOW reports LOW; HIGH claims HIGH with probability 100/104
5. mixed-low: HIGH claims HIGH; LOW claims HIGH with probability
   (16/84) p0 / (1 - p0), which needs p0 <= 84%

Tenet #4: Fail Loud, Fail Early
"""

from fractions import Fraction
from typing import Sequence, Tuple, Union

import structlog

from src.core.errors import ValidationError
from src.core.game_spec import DecisionSpace, GameSpec, validate
from src.core.rational import format_rat, parse_rat
from src.mechanisms.base import MechanismKind
from src.orchestrator.outcome import PayoffMeasure
from src.strategies.base import StrategySet, TruthfulStrategy
from src.strategies.scripted import compile_script

from .chains import NO, YES, idle_chain, probability_chain
from .example1 import ACTIVE, BLUE, LARGE_UTILITIES, RED, agent_names, final_round_utilities, price_coefficient
from .scenario import Scenario, ScenarioKind

logger = structlog.get_logger()

MIXED_HIGH_WEIGHT = Fraction(100, 104)
MIXED_LOW_FACTOR = Fraction(16, 84)
MIXED_LOW_LIMIT = Fraction(84, 100)

PROFILE_NAMES = ("zero", "one", "truthful", "mixed-high", "mixed-low")


def mixed_low_probability(p0: Fraction) -> Fraction:
    """
    Probability that a LOW type claims HIGH in the mixed-low profile.

    Raises:
        ValidationError: If p0 > 84% (the probability would exceed 1)
    """
    if p0 > MIXED_LOW_LIMIT:
        raise ValidationError(
            f"The mixed-low profile needs p0 <= 84%, got {p0}", p0=str(p0)
        )
    if p0 == 0:
        return Fraction(0)
    return MIXED_LOW_FACTOR * p0 / (1 - p0)


def _mixture(high: str, low: str, weight: Fraction) -> str:
    return f"{{{high} = {format_rat(weight)}, {low} = {format_rat(1 - weight)}}}"


def build_appendix_b(
    p0: Sequence[Union[str, Fraction]] = (Fraction(1, 2), Fraction(1, 2)),
    n: int = 3,
    utilities: Sequence[Union[str, int, Fraction]] = LARGE_UTILITIES,
    mixed_low: bool = True,
) -> Scenario:
    """
    Build the one-round coordination game.

    Args:
        p0: Initial HIGH probabilities of (Blue, Red)
        n: Number of agents
        utilities: (LOW, HIGH, YES cost)
        mixed_low: Register profile 5; requires both p0 <= 84%

    Example:
        scenario = build_appendix_b((Fraction(1, 2), Fraction(1, 2)))
        nash_check(scenario.spec, BalancedTeamMechanism(scenario.spec), scenario.profile("one")).is_nash
    """
    if len(p0) != 2:
        raise ValidationError(f"Expected (blue, red) initial probabilities, got {list(p0)}")
    initial = tuple(parse_rat(value) for value in p0)
    for value in initial:
        if not 0 <= value <= 1:
            raise ValidationError(f"Initial probability must be in [0, 1], got {value}")
    values = tuple(parse_rat(value) for value in utilities)
    if len(values) != 3:
        raise ValidationError(f"Expected (low, high, cost) utilities, got {list(utilities)}")

    agents = agent_names(n)
    types, kernel = [], []
    for (agent, prefix), start in zip(ACTIVE, initial):
        agent_types, rows = probability_chain(agent, prefix, [(start,), (Fraction(0), Fraction(1))])
        types += agent_types
        kernel += rows
    for agent in agents[2:]:
        agent_types, rows = idle_chain(agent, 1)
        types += agent_types
        kernel += rows

    spec = validate(
        GameSpec(
            name=f"appendixB-n{n}",
            horizon=1,
            agents=agents,
            types=tuple(types),
            kernel=tuple(kernel),
            decisions=(DecisionSpace(1, (YES, NO)),),
            utilities=tuple(final_round_utilities(agents, types, 1, values)),
            description=(
                f"One-round coordination game, p0 = ({', '.join(format_rat(v) for v in initial)}), "
                f"utilities ({', '.join(format_rat(v) for v in values)})"
            ),
        )
    )

    library = []
    for (agent, prefix), start in zip(ACTIVE, initial):
        low, high = f"{prefix}1:0%", f"{prefix}1:100%"
        scripts: Tuple[Tuple[str, str], ...] = (
            ("zero", f"round 1 => {low}"),
            ("one", f"round 1 => {high}"),
            ("mixed-high", f"round 1 => if type[1] == {high} then {_mixture(high, low, MIXED_HIGH_WEIGHT)} else {low}"),
        )
        if mixed_low:
            weight = mixed_low_probability(start)
            scripts += (
                ("mixed-low", f"round 1 => if type[1] == {high} then {high} else {_mixture(high, low, weight)}"),
            )
        strategies = [compile_script(spec, agent, script, name) for name, script in scripts]
        strategies.insert(2, TruthfulStrategy(agent, "truthful"))
        library.append(StrategySet(agent, tuple(strategies)))

    names = PROFILE_NAMES if mixed_low else PROFILE_NAMES[:-1]
    scenario = Scenario(
        spec=spec,
        kind=ScenarioKind.APPENDIX_B,
        parameters=(
            ("p0", ",".join(format_rat(v) for v in initial)),
            ("n", str(n)),
            ("utilities", ",".join(format_rat(v) for v in values)),
            ("mixed_low", str(mixed_low).lower()),
        ),
        library=tuple(library),
        table=((BLUE, names), (RED, names)),
        profiles=tuple((name, ((BLUE, name), (RED, name))) for name in names),
        coefficient=price_coefficient(n, values),
        measure=PayoffMeasure.TOTAL,
        mechanism=MechanismKind.BALANCED_TEAM,
        notes=(
            "Profiles: 1 zero, 2 one, 3 truthful, 4 mixed-high, 5 mixed-low.",
            "Profile one is an equilibrium only while both initial probabilities are at most 84%.",
        ),
    )
    logger.info("scenario_built", scenario=spec.name, agents=len(agents), horizon=1)
    return scenario
