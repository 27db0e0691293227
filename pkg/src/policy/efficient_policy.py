"""
Efficient Decision Policy and trustful value functionals

The policy picks, for every round and reported profile, the decision that
maximizes the exact expected total utility assuming every agent keeps
reporting truthfully and follows its private recommendation afterwards.

ValueTable evaluates the trustful expected total utility of every agent at
a mixed-round reported profile: some agents already updated to round t,
the rest still at round t-1 and drawn from the kernel. Every transfer rule
prices reports through it.

Tenet #3: Explicit Over Clever - ties go to the first decision in declaration order
Tenet #9: Visibility - explored states are counted and logged
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Dict, Iterator, List, Mapping, Optional, Tuple

import structlog

from src.core.errors import ProfileShapeMismatch, ResourceLimitExceeded
from src.core.game_spec import GameSpec
from src.core.types import PUBLIC_AGENT, Action

logger = structlog.get_logger()

Profile = Tuple[str, ...]
Vector = Tuple[Fraction, ...]

DEFAULT_MAX_POLICY_STATES = 500_000


def add_vectors(left: Vector, right: Vector) -> Vector:
    return tuple(a + b for a, b in zip(left, right))


def scale_vector(vector: Vector, weight: Fraction) -> Vector:
    return tuple(weight * value for value in vector)


@dataclass(frozen=True)
class PolicyEntry:
    """One row of a policy dump."""
    round: int
    profile: Profile
    action: Action
    values: Vector

    def to_dict(self, agents: Tuple[str, ...]) -> dict:
        return {
            "round": self.round,
            "profile": list(self.profile),
            "decision": self.action.label(),
            "values": {agent: str(value) for agent, value in zip(agents, self.values)},
        }


class DecisionPolicy:
    """
    Efficient decision rule computed by memoized backward induction.

    W_t(profile) is the vector of expected remaining utilities from round t
    when the round-t reported profile is `profile`, decisions follow the
    policy and reports stay truthful. The decision maximizes the total.

    Example:
        policy = compute_efficient_policy(spec)
        action = policy.decide(2, ("-", "b2:100%", "r2:100%", "g2:-"))
    """

    def __init__(self, spec: GameSpec, max_states: int = DEFAULT_MAX_POLICY_STATES):
        if max_states <= 0:
            raise ValueError(f"max_states must be positive, got {max_states}")
        self.spec = spec
        self.max_states = max_states
        self._memo: Dict[Tuple[int, Profile], Tuple[Action, Vector]] = {}
        self._zero: Vector = tuple(Fraction(0) for _ in spec.agents)

    @property
    def states_explored(self) -> int:
        return len(self._memo)

    @property
    def zero(self) -> Vector:
        return self._zero

    def decide(self, round_index: int, profile: Profile) -> Action:
        """Efficient decision of round t for a reported round-t profile."""
        return self._entry(round_index, profile)[0]

    def values(self, round_index: int, profile: Profile) -> Vector:
        """W_t: expected utility from round t on, per agent (zero beyond the horizon)."""
        if round_index > self.spec.horizon:
            return self._zero
        return self._entry(round_index, profile)[1]

    def previous_action(self, round_index: int, previous: Profile) -> Action:
        """Decision taken in round t-1 given its reported profile (sentinel for t = 1)."""
        if round_index <= 1:
            return self.spec.sentinel_action()
        return self.decide(round_index - 1, previous)

    def continuation(self, round_index: int, profile: Profile, action: Action) -> Vector:
        """Expected W_{t+1} after deciding `action` in round t."""
        if round_index >= self.spec.horizon:
            return self._zero
        total = self._zero
        for following, probability in self.spec.joint_successors(round_index + 1, profile, action):
            total = add_vectors(total, scale_vector(self.values(round_index + 1, following), probability))
        return total

    def _entry(self, round_index: int, profile: Profile) -> Tuple[Action, Vector]:
        key = (round_index, profile)
        entry = self._memo.get(key)
        if entry is None:
            entry = self._solve(round_index, profile)
            self._memo[key] = entry
        return entry

    def _solve(self, round_index: int, profile: Profile) -> Tuple[Action, Vector]:
        if len(self._memo) >= self.max_states:
            logger.error("policy_state_limit", limit=self.max_states, scenario=self.spec.name)
            raise ResourceLimitExceeded(
                f"Policy exploration exceeded {self.max_states} states",
                limit=self.max_states,
                scenario=self.spec.name,
            )
        best_action: Optional[Action] = None
        best_vector = self._zero
        best_total = Fraction(0)
        for action in self.spec.actions(round_index):
            vector = add_vectors(
                self.spec.utility(round_index, action, profile),
                self.continuation(round_index, profile, action),
            )
            total = sum(vector, Fraction(0))
            if best_action is None or total > best_total:
                best_action, best_vector, best_total = action, vector, total
        return best_action, best_vector

    def expand_all(self) -> List[PolicyEntry]:
        """
        Evaluate every reported profile of every round.

        Policies are defined over reported profiles, so off-truth report
        combinations are included.
        """
        entries = []
        for round_index in range(1, self.spec.horizon + 1):
            spaces = [self.spec.labels(agent, round_index) for agent in self.spec.all_agents]
            for profile in product(*spaces):
                action, values = self._entry(round_index, profile)
                entries.append(PolicyEntry(round_index, profile, action, values))
        logger.info(
            "policy_expanded",
            scenario=self.spec.name,
            entries=len(entries),
            states=self.states_explored,
        )
        return entries


def compute_efficient_policy(
    spec: GameSpec, max_states: int = DEFAULT_MAX_POLICY_STATES
) -> DecisionPolicy:
    """
    Build the efficient decision policy for a validated spec.

    The initial expectation is evaluated eagerly so the explored state count
    is meaningful in the log event.
    """
    policy = DecisionPolicy(spec, max_states=max_states)
    table = ValueTable(policy)
    initial = table.initial_value()
    logger.info(
        "policy_computed",
        scenario=spec.name,
        horizon=spec.horizon,
        states=policy.states_explored,
        efficient_total=str(sum(initial, Fraction(0))),
    )
    return policy


class ValueTable:
    """
    Trustful expected utilities at mixed-round reported profiles.

    stage_value(t, previous, updated) fixes the round-t reports of the agents
    in `updated` and draws every other agent (the public agent included,
    when absent) from the kernel at its round t-1 report, using the round
    t-1 efficient decision. It then averages W_t over those draws.
    """

    def __init__(self, policy: DecisionPolicy):
        self.policy = policy
        self.spec = policy.spec
        self._memo: Dict[tuple, Vector] = {}

    def stage_value(self, round_index: int, previous: Profile, updated: Mapping[str, str]) -> Vector:
        if round_index > self.spec.horizon:
            return self.policy.zero
        fixed = {self.spec.profile_position(agent): label for agent, label in updated.items()}
        key = (round_index, previous, tuple(sorted(fixed.items())))
        cached = self._memo.get(key)
        if cached is not None:
            return cached

        previous_action = self.policy.previous_action(round_index, previous)
        total = self.policy.zero
        for profile, probability in self.spec.joint_successors(round_index, previous, previous_action, fixed):
            total = add_vectors(total, scale_vector(self.policy.values(round_index, profile), probability))
        self._memo[key] = total
        return total

    def initial_value(self) -> Vector:
        """Expected utility of every agent from the initial types under truthful play."""
        return self.stage_value(1, self.spec.initial_profile(), {})

    def efficient_total(self) -> Fraction:
        return sum(self.initial_value(), Fraction(0))

    def stages(self, current: Profile, order: Tuple[str, ...]) -> Iterator[Tuple[Optional[str], Dict[str, str]]]:
        """
        Yield (agent just updated, updated reports) for one round.

        The public agent is updated first, then the agents in `order`.
        """
        updated: Dict[str, str] = {PUBLIC_AGENT: current[0]}
        yield PUBLIC_AGENT, dict(updated)
        for agent in order:
            updated[agent] = current[self.spec.profile_position(agent)]
            yield agent, dict(updated)


def upsilon(
    table: ValueTable,
    round_index: int,
    prefix: int,
    mixed_profile: Profile,
    previous: Optional[Profile] = None,
) -> Vector:
    """
    Trustful expected total utility at a mixed-round profile.

    Args:
        table: ValueTable of the game
        round_index: Round t (1..T)
        prefix: Number j of reporting agents (in declaration order) already at round t
        mixed_profile: Full profile; the public agent and the first j agents
                       carry round-t labels, the others round t-1 labels
        previous: Round t-1 reported profile; needed from round 2 on to
                  recover the round t-1 decision

    Raises:
        ProfileShapeMismatch: If the profile does not fit the game
    """
    spec = table.spec
    if not 1 <= round_index <= spec.horizon:
        raise ProfileShapeMismatch(f"Round {round_index} outside 1..{spec.horizon}")
    if not 0 <= prefix <= len(spec.agents):
        raise ProfileShapeMismatch(f"Prefix {prefix} outside 0..{len(spec.agents)}")
    if len(mixed_profile) != len(spec.all_agents):
        raise ProfileShapeMismatch(
            f"Profile has {len(mixed_profile)} entries, expected {len(spec.all_agents)}",
            profile=list(mixed_profile),
        )

    updated_agents = (PUBLIC_AGENT,) + spec.agents[:prefix]
    for position, agent in enumerate(spec.all_agents):
        expected_round = round_index if agent in updated_agents else round_index - 1
        if mixed_profile[position] not in spec.labels(agent, expected_round):
            raise ProfileShapeMismatch(
                f"{mixed_profile[position]!r} is not a round-{expected_round} type of {agent}",
                agent=agent,
                round=expected_round,
            )

    if previous is None:
        if round_index != 1:
            raise ProfileShapeMismatch("The round t-1 profile is required from round 2 on")
        previous = spec.initial_profile()
    stale = [
        position
        for position, agent in enumerate(spec.all_agents)
        if agent not in updated_agents and previous[position] != mixed_profile[position]
    ]
    if stale:
        raise ProfileShapeMismatch(
            "Mixed profile disagrees with the previous profile for agents not yet updated",
            agents=[spec.all_agents[position] for position in stale],
        )

    updated = {agent: mixed_profile[spec.profile_position(agent)] for agent in updated_agents}
    return table.stage_value(round_index, previous, updated)
