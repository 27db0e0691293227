"""
Play Engine - exact enumeration of a strategy profile's paths of play

Round t of every path:
1. nature draws the round-t type profile from the kernel
2. every agent reports (the public agent truthfully) from its own observation
3. the efficient decision for the reported profile is taken; agents choose
   their private decisions given their recommendation
4. utilities accrue on the true types

Transfers depend on reports only and are priced by the mechanism's ledger.

Tenet #3: Explicit Over Clever - plain recursion in declaration order
Tenet #10: Observable - enumeration size is logged
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Iterator, List, Optional, Tuple

import structlog

from src.core.errors import ResourceLimitExceeded, UnreachableObservation, ValidationError
from src.core.game_spec import GameSpec
from src.core.types import Action, Distribution
from src.mechanisms.base import Mechanism
from src.policy.efficient_policy import DecisionPolicy, Profile, Vector, add_vectors, scale_vector
from src.strategies.base import Observation, ObservationPhase, StrategyProfile

from .outcome import PayoffVector, PlayPath

logger = structlog.get_logger()

DEFAULT_MAX_PATHS = 1_000_000


@dataclass(frozen=True)
class PlayState:
    """
    History of play.

    After nature's draw of round t, `types` holds rounds 0..t, `reports`
    rounds 0..t-1 (0..t once the round's reports are in) and `actions`
    rounds 1..t-1.
    """
    types: Tuple[Profile, ...]
    reports: Tuple[Profile, ...]
    actions: Tuple[Action, ...] = ()

    @classmethod
    def initial(cls, spec: GameSpec) -> "PlayState":
        initial = spec.initial_profile()
        return cls((initial,), (initial,))

    @property
    def round(self) -> int:
        return len(self.types) - 1

    def last_action(self, spec: GameSpec) -> Action:
        return self.actions[-1] if self.actions else spec.sentinel_action()

    def with_types(self, profile: Profile) -> "PlayState":
        return PlayState(self.types + (profile,), self.reports, self.actions)

    def with_reports(self, profile: Profile) -> "PlayState":
        return PlayState(self.types, self.reports + (profile,), self.actions)

    def with_action(self, action: Action) -> "PlayState":
        return PlayState(self.types, self.reports, self.actions + (action,))

    def observation(
        self,
        spec: GameSpec,
        agent: str,
        phase: ObservationPhase,
        recommendation: Optional[str] = None,
    ) -> Observation:
        """Observation of `agent` at the current choice point."""
        position = spec.profile_position(agent)
        private_position = spec.agent_position(agent)
        current = self.round
        revealed = tuple(
            (other, tuple(profile[spec.profile_position(other)] for profile in self.types[:current]))
            for other in spec.agents
            if spec.is_revealed_to(agent, other)
        )
        return Observation(
            agent=agent,
            round=current,
            phase=phase,
            profile_agents=spec.all_agents,
            own_types=tuple(profile[position] for profile in self.types),
            reports=self.reports,
            public_decisions=tuple(action.public for action in self.actions),
            own_private=tuple(action.private[private_position] for action in self.actions),
            revealed=revealed,
            recommendation=recommendation,
        )


def strategy_report(spec: GameSpec, profile: StrategyProfile, state: PlayState, agent: str) -> Distribution:
    """Report distribution of `agent` at a state right after nature's draw."""
    strategy = profile.for_agent(agent)
    observation = state.observation(spec, agent, ObservationPhase.REPORT)
    result = strategy.report(spec, observation)
    if result is None:
        raise UnreachableObservation(
            f"Strategy {strategy.name!r} of {agent} has no report in round {state.round}",
            agent=agent,
            round=state.round,
        )
    allowed = spec.labels(agent, state.round)
    unknown = [label for label in result.support if label not in allowed]
    if unknown:
        raise ValidationError(
            f"Strategy {strategy.name!r} of {agent} reports {unknown}, not in the round-{state.round} alphabet",
            agent=agent,
            round=state.round,
        )
    return result


def strategy_decision(
    spec: GameSpec, profile: StrategyProfile, state: PlayState, agent: str, recommendation: str
) -> Distribution:
    """Private decision distribution of `agent` once the round's reports are in."""
    strategy = profile.for_agent(agent)
    observation = state.observation(spec, agent, ObservationPhase.DECIDE, recommendation)
    result = strategy.decide(spec, observation)
    if result is None:
        raise UnreachableObservation(
            f"Strategy {strategy.name!r} of {agent} has no decision in round {state.round}",
            agent=agent,
            round=state.round,
        )
    allowed = spec.decision_space(state.round).private_options(agent)
    unknown = [label for label in result.support if label not in allowed]
    if unknown:
        raise ValidationError(
            f"Strategy {strategy.name!r} of {agent} chooses {unknown} in round {state.round}",
            agent=agent,
            round=state.round,
        )
    return result


def round_branches(
    spec: GameSpec,
    policy: DecisionPolicy,
    profile: StrategyProfile,
    state: PlayState,
) -> Iterator[Tuple[PlayState, Fraction]]:
    """
    Yield every continuation of a completed history through one more round.

    Probabilities multiply nature's draw, the report mixtures and the
    private decision mixtures.
    """
    round_index = state.round + 1
    for types, nature_probability in spec.joint_successors(
        round_index, state.types[-1], state.last_action(spec)
    ):
        drawn = state.with_types(types)
        report_factors = [((types[0], Fraction(1)),)]
        report_factors += [tuple(strategy_report(spec, profile, drawn, agent).items()) for agent in spec.agents]
        for reports in product(*report_factors):
            report_probability = nature_probability
            for _, weight in reports:
                report_probability *= weight
            reported = drawn.with_reports(tuple(label for label, _ in reports))
            recommended = policy.decide(round_index, reported.reports[-1])
            decision_factors = [
                tuple(strategy_decision(spec, profile, reported, agent, recommended.private[index]).items())
                for index, agent in enumerate(spec.agents)
            ]
            for decisions in product(*decision_factors):
                probability = report_probability
                for _, weight in decisions:
                    probability *= weight
                action = Action(recommended.public, tuple(label for label, _ in decisions))
                yield reported.with_action(action), probability


def path_utilities(spec: GameSpec, state: PlayState) -> Vector:
    """Realized utility of a complete history, per agent."""
    total = tuple(Fraction(0) for _ in spec.agents)
    for round_index, action in enumerate(state.actions, start=1):
        total = add_vectors(total, spec.utility(round_index, action, state.types[round_index]))
    return total


def enumerate_paths(
    spec: GameSpec,
    mechanism: Mechanism,
    profile: StrategyProfile,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> Iterator[PlayPath]:
    """
    Yield every path of play with positive probability.

    Args:
        spec: Validated game
        mechanism: Transfer rule (its policy is the decision rule)
        profile: Strategy of every agent
        max_paths: Cap on the number of yielded paths

    Raises:
        ResourceLimitExceeded: If more than `max_paths` paths exist
    """
    count = 0

    def expand(state: PlayState, probability: Fraction) -> Iterator[PlayPath]:
        nonlocal count
        if state.round == spec.horizon:
            count += 1
            if count > max_paths:
                logger.error("path_limit_exceeded", scenario=spec.name, limit=max_paths)
                raise ResourceLimitExceeded(
                    f"More than {max_paths} paths of play", limit=max_paths, scenario=spec.name
                )
            yield PlayPath(
                probability=probability,
                types=state.types,
                reports=state.reports,
                actions=state.actions,
                utilities=path_utilities(spec, state),
                ledger=mechanism.ledger(state.reports),
            )
            return
        for following, weight in round_branches(spec, mechanism.policy, profile, state):
            yield from expand(following, probability * weight)

    yield from expand(PlayState.initial(spec), Fraction(1))


def expected_payoffs(
    spec: GameSpec,
    mechanism: Mechanism,
    profile: StrategyProfile,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> PayoffVector:
    """
    Exact expected utility, transfer and report price of every agent.

    Example:
        expected_payoffs(spec, BalancedTeamMechanism(spec), StrategyProfile(spec)).total
        # (1, 1) for Example 1 with truthful agents
    """
    zero = mechanism.zero
    utility, transfer, gamma = zero, zero, zero
    subsidy = Fraction(0)
    mass = Fraction(0)
    paths = 0
    for path in enumerate_paths(spec, mechanism, profile, max_paths):
        paths += 1
        mass += path.probability
        utility = add_vectors(utility, scale_vector(path.utilities, path.probability))
        transfer = add_vectors(transfer, scale_vector(path.ledger.totals, path.probability))
        gamma = add_vectors(gamma, scale_vector(path.ledger.gamma_totals, path.probability))
        subsidy += path.probability * path.ledger.subsidy
    if mass != 1:
        logger.error("path_mass_mismatch", scenario=spec.name, mass=str(mass))
        raise ValidationError(f"Path probabilities sum to {mass}, not 1", scenario=spec.name)
    logger.debug(
        "paths_enumerated",
        scenario=spec.name,
        mechanism=mechanism.name,
        profile=profile.describe(),
        paths=paths,
    )
    return PayoffVector(tuple(spec.agents), utility, transfer, gamma, subsidy, paths)


def reachable_states(
    spec: GameSpec,
    policy: DecisionPolicy,
    profile: StrategyProfile,
) -> List[Tuple[PlayState, Fraction]]:
    """Completed histories of every round with their probabilities (round 0 first)."""
    frontier = [(PlayState.initial(spec), Fraction(1))]
    states = list(frontier)
    for _ in range(spec.horizon):
        following = []
        for state, probability in frontier:
            for child, weight in round_branches(spec, policy, profile, state):
                following.append((child, probability * weight))
        states.extend(following)
        frontier = following
    return states
