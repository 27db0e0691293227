"""
Random Games - small seeded games for property tests and the oracle check

Every game has at most three agents, three rounds and three types per
round, a trivial public agent, public options x0/x1 and, optionally,
private options y0/y1. Kernel weights are small integers with at least
one positive weight per row. Utilities are private values: an agent's
utility depends on the public decision, its own private decision and its
own type only.

The same seed always yields the same game.
"""

from fractions import Fraction
from itertools import product
from typing import List, Tuple

import numpy as np
import structlog

from src.core.errors import ValidationError
from src.core.game_spec import DecisionSpace, GameSpec, KernelRow, UtilityRule, validate
from src.core.types import NO_DECISION, AgentType, Distribution
from src.mechanisms.base import MechanismKind
from src.orchestrator.outcome import PayoffMeasure
from src.strategies.base import StrategySet, TruthfulStrategy
from src.strategies.scripted import compile_script

from .scenario import Scenario, ScenarioKind, cell_profiles

logger = structlog.get_logger()

MAX_AGENTS = 3
MAX_ROUNDS = 3
MAX_TYPES = 3

PUBLIC_OPTIONS = ("x0", "x1")
PRIVATE_OPTIONS = ("y0", "y1")
NOISY = "noisy"


def _weights(rng: np.random.Generator, size: int) -> List[Fraction]:
    raw = rng.integers(0, 4, size=size)
    raw[rng.integers(0, size)] += 1
    total = int(raw.sum())
    return [Fraction(int(value), total) for value in raw]


def _check_bounds(agents: int, rounds: int, types: int) -> None:
    for name, value, limit in (
        ("agents", agents, MAX_AGENTS),
        ("rounds", rounds, MAX_ROUNDS),
        ("types", types, MAX_TYPES),
    ):
        if not 1 <= value <= limit:
            raise ValidationError(f"Random games need 1 <= {name} <= {limit}, got {value}")


def random_game(
    seed: int,
    agents: int = 2,
    rounds: int = 2,
    types: int = 2,
    private_decisions: bool = True,
) -> Scenario:
    """
    Build a seeded random game.

    Args:
        seed: numpy Generator seed
        agents: Number of agents (1..3)
        rounds: Horizon (1..3)
        types: Largest type space per round (1..3)
        private_decisions: Give every agent private options y0/y1

    Registered strategies per agent: truthful and "noisy" (seeded random
    reports and private decisions).
    """
    _check_bounds(agents, rounds, types)
    rng = np.random.default_rng(seed)
    names = tuple(f"a{index}" for index in range(1, agents + 1))
    private_options = PRIVATE_OPTIONS if private_decisions else (NO_DECISION,)

    type_list: List[AgentType] = []
    labels = {}
    for agent in names:
        type_list.append(AgentType(agent, 0, f"{agent}:0"))
        labels[(agent, 0)] = (f"{agent}:0",)
        for t in range(1, rounds + 1):
            count = int(rng.integers(1, types + 1))
            labels[(agent, t)] = tuple(f"{agent}:{t}:{j}" for j in range(count))
            type_list += [AgentType(agent, t, label) for label in labels[(agent, t)]]

    kernel: List[KernelRow] = []
    for agent in names:
        targets = labels[(agent, 1)]
        kernel.append(KernelRow(agent, Distribution(tuple(zip(targets, _weights(rng, len(targets))))), round=1))
        for t in range(2, rounds + 1):
            targets = labels[(agent, t)]
            for source, public, private in product(labels[(agent, t - 1)], PUBLIC_OPTIONS, private_options):
                kernel.append(
                    KernelRow(
                        agent,
                        Distribution(tuple(zip(targets, _weights(rng, len(targets))))),
                        round=t,
                        source=source,
                        public_decision=public,
                        private_decision=private,
                    )
                )

    utilities: List[UtilityRule] = []
    for agent in names:
        for t in range(1, rounds + 1):
            for public, private, label in product(PUBLIC_OPTIONS, private_options, labels[(agent, t)]):
                value = int(rng.integers(-3, 4))
                if value == 0:
                    continue
                utilities.append(
                    UtilityRule(
                        agent,
                        Fraction(value),
                        round=t,
                        public_decision=public,
                        private_decisions=((agent, private),) if private_decisions else (),
                        types=((agent, label),),
                    )
                )

    private = tuple((agent, PRIVATE_OPTIONS) for agent in names) if private_decisions else ()
    spec = validate(
        GameSpec(
            name=f"random-{seed}",
            horizon=rounds,
            agents=names,
            types=tuple(type_list),
            kernel=tuple(kernel),
            decisions=tuple(DecisionSpace(t, PUBLIC_OPTIONS, private) for t in range(1, rounds + 1)),
            utilities=tuple(utilities),
            description=f"Random game (seed {seed}), {agents} agents, {rounds} rounds",
        )
    )

    library = tuple(
        StrategySet(
            agent,
            (
                TruthfulStrategy(agent),
                compile_script(spec, agent, _noisy_script(seed, position, private_decisions), NOISY),
            ),
        )
        for position, agent in enumerate(names)
    )
    table: Tuple[Tuple[str, Tuple[str, ...]], ...] = tuple((agent, ("truthful", NOISY)) for agent in names)
    scenario = Scenario(
        spec=spec,
        kind=ScenarioKind.RANDOM,
        parameters=(
            ("seed", str(seed)),
            ("agents", str(agents)),
            ("rounds", str(rounds)),
            ("types", str(types)),
            ("private_decisions", str(private_decisions).lower()),
        ),
        library=library,
        table=table,
        profiles=((NOISY, tuple((agent, NOISY) for agent in names)),) + cell_profiles(table),
        measure=PayoffMeasure.TOTAL,
        mechanism=MechanismKind.BALANCED_TEAM if agents >= 2 else MechanismKind.NONE,
    )
    logger.debug("scenario_built", scenario=spec.name, agents=agents, horizon=rounds)
    return scenario


def _noisy_script(seed: int, position: int, private_decisions: bool) -> str:
    script_seed = abs(seed) * 10 + position
    script = f"default => random {script_seed}"
    if private_decisions:
        script += f"; decide * => random {script_seed + 5}"
    return script
