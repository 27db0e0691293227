"""
Private YES/NO Game

Every agent privately answers YES or NO in each of k rounds. An agent is
paid 1 in a round when it answers YES and some other agent answers YES in
the same round or has answered YES in an earlier round. Answering YES may
carry a cost.

The answer history is part of the type: an agent is "quiet" until it
answers YES and "spoke" from the following round on. The payoff condition
is an OR over the other agents, written as disjoint additive rules: the
rule for other agent j requires every earlier other agent to be quiet and
answering NO.
"""

from fractions import Fraction
from typing import List, Union

import structlog

from src.core.errors import ValidationError
from src.core.game_spec import DecisionSpace, GameSpec, KernelRow, UtilityRule, validate
from src.core.rational import format_rat, parse_rat
from src.core.types import AgentType, Distribution
from src.mechanisms.base import MechanismKind
from src.orchestrator.outcome import PayoffMeasure
from src.strategies.base import StrategySet, TruthfulStrategy
from src.strategies.scripted import compile_script

from .chains import NO, YES
from .scenario import Scenario, ScenarioKind, cell_profiles

logger = structlog.get_logger()

QUIET = "quiet"
SPOKE = "spoke"

ALWAYS_YES = "always-yes"
ALWAYS_NO = "always-no"


def _kernel(agent: str, horizon: int) -> List[KernelRow]:
    if horizon < 2:
        return [KernelRow(agent, Distribution.point(QUIET))]
    rows = []
    if horizon >= 3:
        rows.append(KernelRow(agent, Distribution.point(SPOKE), source=SPOKE))
    rows += [
        KernelRow(agent, Distribution.point(SPOKE), source=QUIET, private_decision=YES),
        KernelRow(agent, Distribution.point(QUIET)),
    ]
    return rows


def _rules(agents, horizon: int, yes_cost: Fraction) -> List[UtilityRule]:
    rules = []
    for agent in agents:
        others = [other for other in agents if other != agent]
        for position, other in enumerate(others):
            earlier = others[:position]
            silent = tuple((name, NO) for name in earlier)
            quiet = tuple((name, QUIET) for name in earlier) if horizon >= 2 else ()
            rules.append(
                UtilityRule(agent, Fraction(1), private_decisions=((agent, YES),) + silent + ((other, YES),), types=quiet)
            )
            if horizon >= 2:
                rules.append(
                    UtilityRule(
                        agent,
                        Fraction(1),
                        private_decisions=((agent, YES),) + silent + ((other, NO),),
                        types=quiet + ((other, SPOKE),),
                    )
                )
        if yes_cost:
            rules.append(UtilityRule(agent, -yes_cost, private_decisions=((agent, YES),)))
    return rules


def build_yesno(n: int = 2, k: int = 2, yes_cost: Union[str, int, Fraction] = Fraction(0)) -> Scenario:
    """
    Build the private YES/NO game.

    Args:
        n: Number of agents (at least 2)
        k: Number of rounds (at least 1)
        yes_cost: Utility lost by every YES answer (non-negative)

    Registered strategies per agent: truthful (follow the recommendation),
    always-yes, always-no.
    """
    cost = parse_rat(yes_cost)
    if n < 2:
        raise ValidationError(f"The YES/NO game needs n >= 2, got {n}")
    if k < 1:
        raise ValidationError(f"The YES/NO game needs k >= 1, got {k}")
    if cost < 0:
        raise ValidationError(f"YES cost must be non-negative, got {cost}")

    agents = tuple(f"agent{index}" for index in range(1, n + 1))
    types, kernel = [], []
    for agent in agents:
        types.append(AgentType(agent, 0, QUIET))
        for t in range(1, k + 1):
            types.append(AgentType(agent, t, QUIET))
            if t >= 2:
                types.append(AgentType(agent, t, SPOKE))
        kernel += _kernel(agent, k)

    private = tuple((agent, (YES, NO)) for agent in agents)
    spec = validate(
        GameSpec(
            name=f"yesno-n{n}-k{k}",
            horizon=k,
            agents=agents,
            types=tuple(types),
            kernel=tuple(kernel),
            decisions=tuple(DecisionSpace(t, private=private) for t in range(1, k + 1)),
            utilities=tuple(_rules(agents, k, cost)),
            description=f"Private YES/NO game, {n} agents, {k} rounds, YES cost {format_rat(cost)}",
        )
    )

    library = tuple(
        StrategySet(
            agent,
            (
                TruthfulStrategy(agent),
                compile_script(spec, agent, f"decide * => {YES}", ALWAYS_YES),
                compile_script(spec, agent, f"decide * => {NO}", ALWAYS_NO),
            ),
        )
        for agent in agents
    )
    names = ("truthful", ALWAYS_YES, ALWAYS_NO)
    table = tuple((agent, names) for agent in agents)
    profiles = (
        (ALWAYS_YES, tuple((agent, ALWAYS_YES) for agent in agents)),
        (ALWAYS_NO, tuple((agent, ALWAYS_NO) for agent in agents)),
    )

    scenario = Scenario(
        spec=spec,
        kind=ScenarioKind.YES_NO,
        parameters=(("n", str(n)), ("k", str(k)), ("yes_cost", format_rat(cost))),
        library=library,
        table=table,
        profiles=profiles + cell_profiles(table),
        measure=PayoffMeasure.TOTAL,
        mechanism=MechanismKind.NONE,
        notes=("Answers are private decisions; types record whether an agent has answered YES before.",),
    )
    logger.info("scenario_built", scenario=spec.name, agents=n, horizon=k)
    return scenario
