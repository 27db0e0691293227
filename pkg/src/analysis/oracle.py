"""
Brute-Force Oracle

Materializes every outcome of a profile as an explicit list, one round at a
time, with a plain Cartesian product over nature's per-agent draws, every
agent's report and every agent's private decision. Payoffs are summed
directly from utilities and unmemoized round transfers.

Shares no enumeration code with the play engine; agreement of the two is
the cross-check.
"""

from fractions import Fraction
from itertools import product
from typing import List, Tuple

import structlog

from src.core.errors import ResourceLimitExceeded
from src.core.game_spec import GameSpec
from src.core.types import Action
from src.mechanisms.base import Mechanism
from src.orchestrator.outcome import PayoffVector
from src.orchestrator.play import PlayState
from src.strategies.base import ObservationPhase, StrategyProfile

logger = structlog.get_logger()

DEFAULT_MAX_TERMS = 1_000_000


def _factor(distribution) -> List[Tuple[str, Fraction]]:
    return [(outcome, weight) for outcome, weight in distribution.weights if weight > 0]


def brute_force_payoffs(
    spec: GameSpec,
    mechanism: Mechanism,
    profile: StrategyProfile,
    max_terms: int = DEFAULT_MAX_TERMS,
) -> PayoffVector:
    """
    Expected payoffs by explicit outcome lists.

    Raises:
        ResourceLimitExceeded: If any round's outcome list exceeds `max_terms`
    """
    outcomes: List[Tuple[PlayState, Fraction]] = [(PlayState.initial(spec), Fraction(1))]
    for round_index in range(1, spec.horizon + 1):
        expanded: List[Tuple[PlayState, Fraction]] = []
        for state, weight in outcomes:
            previous = state.types[-1]
            last = state.actions[-1] if state.actions else spec.sentinel_action()
            draws = [
                _factor(spec.successor_distribution(agent, round_index, previous[position], previous[0], last))
                for position, agent in enumerate(spec.all_agents)
            ]
            for drawn in product(*draws):
                types = tuple(label for label, _ in drawn)
                nature = weight
                for _, probability in drawn:
                    nature *= probability
                typed = state.with_types(types)
                reports = [[(types[0], Fraction(1))]]
                for agent in spec.agents:
                    observation = typed.observation(spec, agent, ObservationPhase.REPORT)
                    reports.append(_factor(profile.for_agent(agent).report(spec, observation)))
                for reported in product(*reports):
                    with_reports = typed.with_reports(tuple(label for label, _ in reported))
                    reported_weight = nature
                    for _, probability in reported:
                        reported_weight *= probability
                    recommended = mechanism.policy.decide(round_index, with_reports.reports[-1])
                    decisions = []
                    for index, agent in enumerate(spec.agents):
                        observation = with_reports.observation(
                            spec, agent, ObservationPhase.DECIDE, recommended.private[index]
                        )
                        decisions.append(_factor(profile.for_agent(agent).decide(spec, observation)))
                    for decided in product(*decisions):
                        probability = reported_weight
                        for _, share in decided:
                            probability *= share
                        action = Action(recommended.public, tuple(label for label, _ in decided))
                        expanded.append((with_reports.with_action(action), probability))
                        if len(expanded) > max_terms:
                            logger.error("oracle_limit_exceeded", scenario=spec.name, limit=max_terms)
                            raise ResourceLimitExceeded(
                                f"Brute-force outcome list exceeds {max_terms} terms",
                                limit=max_terms,
                                scenario=spec.name,
                            )
        outcomes = expanded

    agents = len(spec.agents)
    utility = [Fraction(0)] * agents
    transfer = [Fraction(0)] * agents
    gamma = [Fraction(0)] * agents
    subsidy = Fraction(0)
    for state, probability in outcomes:
        for round_index in range(1, spec.horizon + 1):
            realized = spec.utility(round_index, state.actions[round_index - 1], state.types[round_index])
            transfers = mechanism.round_transfers(
                round_index, state.reports[round_index - 1], state.reports[round_index]
            )
            subsidy += probability * transfers.subsidy
            for index in range(agents):
                utility[index] += probability * realized[index]
                transfer[index] += probability * transfers.net[index]
                gamma[index] += probability * transfers.gamma[index]

    logger.debug("oracle_evaluated", scenario=spec.name, outcomes=len(outcomes))
    return PayoffVector(tuple(spec.agents), tuple(utility), tuple(transfer), tuple(gamma), subsidy, len(outcomes))
