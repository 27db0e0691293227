"""
Collusion Game for the unbalanced team rule

Two agents draw a fresh signal every round, 1000 or -1 with equal
probability. A public YES/NO decision is taken each round; on YES every
agent receives its own signal. Under the unbalanced rule each agent is
paid the other's reported utility from an outside budget, so a pair that
always claims 1000 forces YES and collects 1000 per round each.

Registered strategies per agent:
    truthful
    always-1000: claim 1000 in every round
    trigger: claim 1000 while the other agent has claimed 1000 in every
             earlier round, report truthfully afterwards
"""

from fractions import Fraction
from typing import List

import structlog

from src.core.errors import ValidationError
from src.core.game_spec import DecisionSpace, GameSpec, KernelRow, UtilityRule, validate
from src.core.types import AgentType, Distribution
from src.mechanisms.base import MechanismKind
from src.orchestrator.outcome import PayoffMeasure
from src.strategies.base import StrategySet, TruthfulStrategy
from src.strategies.scripted import compile_script

from .chains import NO, YES
from .scenario import Scenario, ScenarioKind, cell_profiles

logger = structlog.get_logger()

AGENTS = ("agent1", "agent2")
START = "s0"
SIGNALS = (("1000", Fraction(1000)), ("-1", Fraction(-1)))
HIGH_SIGNAL = "1000"

ALWAYS_HIGH = "always-1000"
TRIGGER = "trigger"


def trigger_script(other: str, horizon: int) -> str:
    """Claim 1000 while `other` has claimed 1000 in every earlier round."""
    rules = [f"round 1 => {HIGH_SIGNAL}"]
    for t in range(2, horizon + 1):
        loyal = " and ".join(f"report[{other}@{s}] == {HIGH_SIGNAL}" for s in range(1, t))
        rules.append(f"round {t} => if {loyal} then {HIGH_SIGNAL} else truth")
    return "; ".join(rules)


def _utilities() -> List[UtilityRule]:
    return [
        UtilityRule(agent, value, public_decision=YES, types=((agent, label),))
        for agent in AGENTS
        for label, value in SIGNALS
    ]


def build_collusion(k: int = 3) -> Scenario:
    """
    Build the two-agent collusion game.

    Example:
        scenario = build_collusion(3)
        mechanism = MechanismFactory.create("unbalanced", scenario.spec)
        expected_payoffs(scenario.spec, mechanism, scenario.profile(ALWAYS_HIGH))
        # 8997/2 per agent, against 5997/2 when both report truthfully
    """
    if k < 1:
        raise ValidationError(f"The collusion game needs k >= 1, got {k}")

    labels = tuple(label for label, _ in SIGNALS)
    types = []
    for agent in AGENTS:
        types.append(AgentType(agent, 0, START))
        types += [AgentType(agent, t, label) for t in range(1, k + 1) for label in labels]
    kernel = tuple(KernelRow(agent, Distribution.uniform(labels)) for agent in AGENTS)

    spec = validate(
        GameSpec(
            name=f"collusion-k{k}",
            horizon=k,
            agents=AGENTS,
            types=tuple(types),
            kernel=kernel,
            decisions=tuple(DecisionSpace(t, (YES, NO)) for t in range(1, k + 1)),
            utilities=tuple(_utilities()),
            description=f"Two-agent collusion game, {k} rounds, signals 1000 / -1",
        )
    )

    library = []
    for agent, other in ((AGENTS[0], AGENTS[1]), (AGENTS[1], AGENTS[0])):
        library.append(
            StrategySet(
                agent,
                (
                    TruthfulStrategy(agent),
                    compile_script(spec, agent, f"default => {HIGH_SIGNAL}", ALWAYS_HIGH),
                    compile_script(spec, agent, trigger_script(other, k), TRIGGER),
                ),
            )
        )
    names = ("truthful", ALWAYS_HIGH, TRIGGER)
    table = tuple((agent, names) for agent in AGENTS)
    profiles = (
        (ALWAYS_HIGH, tuple((agent, ALWAYS_HIGH) for agent in AGENTS)),
        (TRIGGER, tuple((agent, TRIGGER) for agent in AGENTS)),
    )

    scenario = Scenario(
        spec=spec,
        kind=ScenarioKind.COLLUSION,
        parameters=(("k", str(k)),),
        library=tuple(library),
        table=table,
        profiles=profiles + cell_profiles(table),
        measure=PayoffMeasure.TOTAL,
        mechanism=MechanismKind.UNBALANCED_TEAM,
        notes=("Under the unbalanced rule both agents gain by always claiming 1000; the ledger shows the subsidy.",),
    )
    logger.info("scenario_built", scenario=spec.name, agents=len(AGENTS), horizon=k)
    return scenario
