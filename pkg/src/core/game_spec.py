"""
Game Specification - finite-horizon stochastic reporting games

A GameSpec describes an n-agent, T-round game:
- per-round type spaces for every agent plus the public agent
- a transition kernel mu(type_{t-1}, public_{t-1}, x0_{t-1}, xi_{t-1}) per agent
- per-round public and private decision spaces
- additive per-round utility rules

Round t proceeds as: nature draws every agent's round-t type from the kernel
(using round t-1 types and decisions, "-" in round 1), agents report, the
decision for round t is taken, and utilities accrue on the true types.

Tenet #5: Make Illegal States Unrepresentable
Tenet #4: Fail Loud, Fail Early
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from itertools import product
from typing import Callable, Dict, List, Optional, Tuple

import structlog

from .errors import (
    DanglingKernelEntry,
    MissingUtility,
    UndefinedKernelEntry,
    ValidationError,
)
from .types import (
    NO_DECISION,
    PUBLIC_AGENT,
    WILDCARD,
    Action,
    AgentType,
    Distribution,
    matches_pattern,
)

logger = structlog.get_logger()

EXTERNAL_PAYER = "external"


@dataclass(frozen=True)
class KernelRow:
    """
    One row of the transition kernel.

    Produces the distribution of `agent`'s type in `round` (None = any round)
    when the previous type, public type and previous decisions match.
    Rows are tried in declaration order; the first match wins.
    """
    agent: str
    outcomes: Distribution
    round: Optional[int] = None
    source: str = WILDCARD
    public_type: str = WILDCARD
    public_decision: str = WILDCARD
    private_decision: str = WILDCARD

    def matches(
        self,
        round_index: int,
        source: str,
        public_type: str,
        public_decision: str,
        private_decision: str,
    ) -> bool:
        return (
            (self.round is None or self.round == round_index)
            and self.source in (WILDCARD, source)
            and self.public_type in (WILDCARD, public_type)
            and matches_pattern(self.public_decision, public_decision)
            and self.private_decision in (WILDCARD, private_decision)
        )

    @property
    def key(self) -> tuple:
        return (
            self.agent,
            self.round,
            self.source,
            self.public_type,
            self.public_decision,
            self.private_decision,
        )


@dataclass(frozen=True)
class UtilityRule:
    """
    Additive utility term.

    Agent `agent` receives `value` in every matching round. A rule matches
    when the public decision matches `public_decision`, each listed agent's
    private decision equals the given label, and each listed agent's true
    round-t type equals the given label.
    """
    agent: str
    value: Fraction
    round: Optional[int] = None
    public_decision: str = WILDCARD
    private_decisions: Tuple[Tuple[str, str], ...] = ()
    types: Tuple[Tuple[str, str], ...] = ()


@dataclass(frozen=True)
class DecisionSpace:
    """Public decision labels and per-agent private decision labels for one round."""
    round: int
    public: Tuple[str, ...] = (NO_DECISION,)
    private: Tuple[Tuple[str, Tuple[str, ...]], ...] = ()

    def private_options(self, agent: str) -> Tuple[str, ...]:
        for name, options in self.private:
            if name == agent:
                return options
        return (NO_DECISION,)


@dataclass(frozen=True)
class MartingaleViolation:
    """An annotated type whose successor annotations do not average to its own."""
    agent: str
    round: int
    label: str
    annotation: Fraction
    expectation: Fraction

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "round": self.round,
            "label": self.label,
            "annotation": str(self.annotation),
            "expectation": str(self.expectation),
        }


@dataclass(frozen=True)
class GameSpec:
    """
    Full description of a dynamic stochastic reporting game.

    Attributes:
        name: Scenario name
        horizon: Number of rounds T (0 is a valid degenerate game)
        agents: Reporting agents in declaration order
        types: Every AgentType, rounds 0..T; round 0 spaces are singletons
        kernel: Transition rows for rounds 1..T
        decisions: Decision spaces; omitted rounds have trivial decisions
        utilities: Additive utility rules
        revelations: (observer, revealed) pairs; the observer sees the
                     revealed agent's past true types
        description: Free text

    The public agent is implicit: when it declares no types it has the
    single label "-" in every round and a trivial kernel.

    Fields never change after construction. Decision tables are built once
    per instance and kernel lookups are memoized per instance.
    """
    name: str
    horizon: int
    agents: Tuple[str, ...]
    types: Tuple[AgentType, ...]
    kernel: Tuple[KernelRow, ...] = ()
    decisions: Tuple[DecisionSpace, ...] = ()
    utilities: Tuple[UtilityRule, ...] = ()
    revelations: Tuple[Tuple[str, str], ...] = ()
    description: str = ""

    # ------------------------------------------------------------------
    # Indexes
    # ------------------------------------------------------------------

    @cached_property
    def all_agents(self) -> Tuple[str, ...]:
        """Public agent first, then the reporting agents."""
        return (PUBLIC_AGENT,) + tuple(self.agents)

    @cached_property
    def _agent_positions(self) -> Dict[str, int]:
        return {agent: position for position, agent in enumerate(self.agents)}

    @cached_property
    def _type_index(self) -> Dict[Tuple[str, int], Tuple[AgentType, ...]]:
        index: Dict[Tuple[str, int], List[AgentType]] = {}
        for agent_type in self.types:
            index.setdefault((agent_type.agent, agent_type.round), []).append(agent_type)
        return {key: tuple(values) for key, values in index.items()}

    @cached_property
    def public_is_trivial(self) -> bool:
        return not any(agent_type.agent == PUBLIC_AGENT for agent_type in self.types)

    @cached_property
    def _decision_index(self) -> Dict[int, DecisionSpace]:
        return {space.round: space for space in self.decisions}

    @cached_property
    def _kernel_by_agent(self) -> Dict[str, Tuple[KernelRow, ...]]:
        rows: Dict[str, List[KernelRow]] = {}
        for row in self.kernel:
            rows.setdefault(row.agent, []).append(row)
        return {agent: tuple(values) for agent, values in rows.items()}

    @cached_property
    def _utilities_by_round(self) -> Dict[int, Tuple[UtilityRule, ...]]:
        return {
            t: tuple(rule for rule in self.utilities if rule.round in (None, t))
            for t in range(1, self.horizon + 1)
        }

    @cached_property
    def _action_table(self) -> Dict[int, Tuple[Action, ...]]:
        return {t: self._build_actions(t) for t in range(1, self.horizon + 1)}

    @cached_property
    def _kernel_lookup(self) -> Callable[..., Distribution]:
        return lru_cache(maxsize=None)(self._match_kernel)

    def agent_position(self, agent: str) -> int:
        """Index of a reporting agent in `agents` (private decisions, payoff vectors)."""
        try:
            return self._agent_positions[agent]
        except KeyError:
            raise ValidationError(f"Unknown agent {agent!r}", agent=agent) from None

    def profile_position(self, agent: str) -> int:
        """Index of an agent in a full profile (public agent first)."""
        if agent == PUBLIC_AGENT:
            return 0
        return self.agent_position(agent) + 1

    def type_space(self, agent: str, round_index: int) -> Tuple[AgentType, ...]:
        """Round-t type space; also the agent's report alphabet in round t."""
        if agent == PUBLIC_AGENT and self.public_is_trivial:
            return (AgentType(PUBLIC_AGENT, round_index, NO_DECISION),)
        return self._type_index.get((agent, round_index), ())

    def labels(self, agent: str, round_index: int) -> Tuple[str, ...]:
        return tuple(agent_type.label for agent_type in self.type_space(agent, round_index))

    def type_of(self, agent: str, round_index: int, label: str) -> AgentType:
        for agent_type in self.type_space(agent, round_index):
            if agent_type.label == label:
                return agent_type
        raise ValidationError(
            f"Unknown type {label!r} for agent {agent} in round {round_index}",
            agent=agent,
            round=round_index,
            label=label,
        )

    def annotation(self, agent: str, round_index: int, label: str) -> Optional[Fraction]:
        return self.type_of(agent, round_index, label).annotation

    def initial_profile(self) -> Tuple[str, ...]:
        """Publicly known round-0 types (full profile, public agent first)."""
        return tuple(self.labels(agent, 0)[0] for agent in self.all_agents)

    def decision_space(self, round_index: int) -> DecisionSpace:
        return self._decision_index.get(round_index, DecisionSpace(round_index))

    def actions(self, round_index: int) -> Tuple[Action, ...]:
        """All decisions of a round: public outer, private options in agent order."""
        actions = self._action_table.get(round_index)
        return actions if actions is not None else self._build_actions(round_index)

    def _build_actions(self, round_index: int) -> Tuple[Action, ...]:
        space = self.decision_space(round_index)
        private_spaces = [space.private_options(agent) for agent in self.agents]
        return tuple(
            Action(public, tuple(private))
            for public in space.public
            for private in product(*private_spaces)
        )

    def sentinel_action(self) -> Action:
        return Action.sentinel(len(self.agents))

    def is_revealed_to(self, observer: str, revealed: str) -> bool:
        return (observer, revealed) in self.revelations

    # ------------------------------------------------------------------
    # Kernel and utilities
    # ------------------------------------------------------------------

    def successor_distribution(
        self,
        agent: str,
        round_index: int,
        source: str,
        public_source: str,
        previous: Action,
    ) -> Distribution:
        """
        Distribution of `agent`'s round-t type label.

        Args:
            agent: Agent whose type is drawn
            round_index: Round t of the new type (1..T)
            source: Agent's round t-1 type label
            public_source: Public agent's round t-1 type label
            previous: Decision taken in round t-1 (sentinel in round 1)

        Raises:
            UndefinedKernelEntry: If no kernel row matches
        """
        private = NO_DECISION if agent == PUBLIC_AGENT else previous.private[self.agent_position(agent)]
        return self._kernel_lookup(agent, round_index, source, public_source, previous.public, private)

    def _match_kernel(
        self,
        agent: str,
        round_index: int,
        source: str,
        public_source: str,
        public_decision: str,
        private: str,
    ) -> Distribution:
        if agent == PUBLIC_AGENT and self.public_is_trivial:
            return Distribution.point(NO_DECISION)
        for row in self._kernel_by_agent.get(agent, ()):
            if row.matches(round_index, source, public_source, public_decision, private):
                return row.outcomes
        logger.error(
            "kernel_lookup_failed",
            agent=agent,
            round=round_index,
            source=source,
            public_source=public_source,
            public_decision=public_decision,
            private_decision=private,
        )
        raise UndefinedKernelEntry(
            f"No kernel row for {agent} entering round {round_index} from {source!r} "
            f"(public {public_source!r}, decisions {public_decision!r}/{private!r})",
            agent=agent,
            round=round_index,
            source=source,
        )

    def utility(
        self, round_index: int, action: Action, profile: Tuple[str, ...]
    ) -> Tuple[Fraction, ...]:
        """
        Per-agent utility of round t.

        Args:
            round_index: Round t
            action: Decision of round t
            profile: Round-t type labels (full profile, public agent first)

        Returns:
            Utility per agent, aligned with `agents`
        """
        totals = [Fraction(0)] * len(self.agents)
        for rule in self._utilities_by_round.get(round_index, ()):
            if not matches_pattern(rule.public_decision, action.public):
                continue
            if any(
                action.private[self.agent_position(agent)] != label
                for agent, label in rule.private_decisions
            ):
                continue
            if any(profile[self.profile_position(agent)] != label for agent, label in rule.types):
                continue
            totals[self.agent_position(rule.agent)] += rule.value
        return tuple(totals)

    def joint_successors(
        self,
        round_index: int,
        previous: Tuple[str, ...],
        previous_action: Action,
        fixed: Optional[Dict[int, str]] = None,
    ):
        """
        Yield (round-t profile, probability) for independent per-agent draws.

        Args:
            round_index: Round t being drawn
            previous: Round t-1 profile (full, public agent first)
            previous_action: Decision of round t-1
            fixed: Profile positions already known; they are not drawn
        """
        fixed = fixed or {}
        factors = []
        for position, agent in enumerate(self.all_agents):
            if position in fixed:
                factors.append(((fixed[position], Fraction(1)),))
            else:
                outcome = self.successor_distribution(
                    agent, round_index, previous[position], previous[0], previous_action
                )
                factors.append(tuple(outcome.items()))
        for combination in product(*factors):
            probability = Fraction(1)
            for _, weight in combination:
                probability *= weight
            yield tuple(label for label, _ in combination), probability

    def transition_probability(
        self, agent: str, from_round: int, from_label: str, to_round: int, to_label: str
    ) -> Fraction:
        """
        Multi-round transition probability of a decision-independent chain.

        Uses the sentinel decision in every round; raises UndefinedKernelEntry
        when the chain depends on decisions.
        """
        if to_round < from_round:
            raise ValidationError(f"Target round {to_round} precedes source round {from_round}")
        self.type_of(agent, from_round, from_label)
        public = self.labels(PUBLIC_AGENT, from_round)[0]
        current: Dict[str, Fraction] = {from_label: Fraction(1)}
        for t in range(from_round + 1, to_round + 1):
            following: Dict[str, Fraction] = {}
            for label, weight in current.items():
                step = self.successor_distribution(agent, t, label, public, self.sentinel_action())
                for outcome, probability in step.items():
                    following[outcome] = following.get(outcome, Fraction(0)) + weight * probability
            current = following
            public = self.labels(PUBLIC_AGENT, t)[0]
        self.type_of(agent, to_round, to_label)
        return current.get(to_label, Fraction(0))

    # ------------------------------------------------------------------
    # Validation
    # ------------------------------------------------------------------

    def _kernel_contexts(self, agent: str, round_index: int):
        """All (source, public source, previous action) inputs for round t."""
        sources = self.labels(agent, round_index - 1)
        public_sources = self.labels(PUBLIC_AGENT, round_index - 1)
        if round_index == 1:
            previous_actions = (self.sentinel_action(),)
        else:
            space = self.decision_space(round_index - 1)
            own = (NO_DECISION,) if agent == PUBLIC_AGENT else space.private_options(agent)
            previous_actions = tuple(
                Action(public, self._with_private(agent, option))
                for public in space.public
                for option in own
            )
        return product(sources, public_sources, previous_actions)

    def _with_private(self, agent: str, option: str) -> Tuple[str, ...]:
        private = [NO_DECISION] * len(self.agents)
        if agent != PUBLIC_AGENT:
            private[self.agent_position(agent)] = option
        return tuple(private)

    def validate(self) -> "GameSpec":
        """
        Check every model invariant and return self.

        Raises:
            ValidationError: Structural problems (agents, types, decisions)
            DanglingKernelEntry: Kernel rows referencing unknown labels, or
                                 reachable kernel inputs without a row
            NonUnitDistribution: Raised earlier, when a Distribution is built
            MissingUtility: Utility rules referencing unknown agents or labels
        """
        self._validate_structure()
        self._validate_kernel()
        self._validate_utilities()
        logger.debug(
            "game_validated",
            scenario=self.name,
            agents=len(self.agents),
            horizon=self.horizon,
            kernel_rows=len(self.kernel),
            utility_rules=len(self.utilities),
        )
        return self

    def _validate_structure(self) -> None:
        if self.horizon < 0:
            raise ValidationError(f"Horizon must be non-negative, got {self.horizon}")
        if not self.agents:
            raise ValidationError("At least one reporting agent is required")
        if len(set(self.agents)) != len(self.agents):
            raise ValidationError(f"Agent names must be unique, got {list(self.agents)}")
        for reserved in (PUBLIC_AGENT, EXTERNAL_PAYER):
            if reserved in self.agents:
                raise ValidationError(f"Agent name {reserved!r} is reserved")

        seen = set()
        for agent_type in self.types:
            if agent_type.agent not in self.all_agents:
                raise ValidationError(
                    f"Type {agent_type.label!r} belongs to unknown agent {agent_type.agent!r}",
                    agent=agent_type.agent,
                )
            if agent_type.round > self.horizon:
                raise ValidationError(
                    f"Type {agent_type.label!r} of {agent_type.agent} is in round "
                    f"{agent_type.round}, beyond horizon {self.horizon}"
                )
            key = (agent_type.agent, agent_type.round, agent_type.label)
            if key in seen:
                raise ValidationError(
                    f"Duplicate type {agent_type.label!r} for {agent_type.agent} "
                    f"in round {agent_type.round}"
                )
            seen.add(key)

        agents_with_types = self.agents if self.public_is_trivial else self.all_agents
        for agent in agents_with_types:
            for t in range(self.horizon + 1):
                if not self.type_space(agent, t):
                    raise ValidationError(
                        f"Agent {agent} has no types in round {t}", agent=agent, round=t
                    )
            if len(self.type_space(agent, 0)) != 1:
                raise ValidationError(
                    f"Initial type of {agent} must be unique, got {list(self.labels(agent, 0))}",
                    agent=agent,
                )

        rounds_seen = set()
        for space in self.decisions:
            if not 1 <= space.round <= self.horizon:
                raise ValidationError(f"Decision space for round {space.round} outside 1..{self.horizon}")
            if space.round in rounds_seen:
                raise ValidationError(f"Duplicate decision space for round {space.round}")
            rounds_seen.add(space.round)
            if not space.public or len(set(space.public)) != len(space.public):
                raise ValidationError(
                    f"Public decisions of round {space.round} must be non-empty and unique"
                )
            for agent, options in space.private:
                if agent not in self.agents:
                    raise ValidationError(
                        f"Private decisions of round {space.round} name unknown agent {agent!r}"
                    )
                if not options or len(set(options)) != len(options):
                    raise ValidationError(
                        f"Private decisions of {agent} in round {space.round} must be non-empty and unique"
                    )

        for observer, revealed in self.revelations:
            if observer not in self.agents or revealed not in self.agents or observer == revealed:
                raise ValidationError(f"Invalid revelation {observer!r} -> {revealed!r}")

    def _validate_kernel(self) -> None:
        keys = set()
        for row in self.kernel:
            if row.agent not in self.all_agents:
                raise DanglingKernelEntry(f"Kernel row for unknown agent {row.agent!r}", agent=row.agent)
            if row.round is not None and not 1 <= row.round <= self.horizon:
                raise DanglingKernelEntry(
                    f"Kernel row for {row.agent} targets round {row.round} outside 1..{self.horizon}",
                    agent=row.agent,
                    round=row.round,
                )
            if row.key in keys:
                raise ValidationError(f"Duplicate kernel row {row.key}", agent=row.agent)
            keys.add(row.key)
            rounds = [row.round] if row.round is not None else range(1, self.horizon + 1)
            if row.source != WILDCARD and not any(row.source in self.labels(row.agent, t - 1) for t in rounds):
                raise DanglingKernelEntry(
                    f"Kernel row for {row.agent} starts from unknown type {row.source!r}",
                    agent=row.agent,
                    label=row.source,
                )
            if row.round is not None:
                unknown = [o for o in row.outcomes.support if o not in self.labels(row.agent, row.round)]
                if unknown:
                    raise DanglingKernelEntry(
                        f"Kernel row for {row.agent} produces unknown round-{row.round} types {unknown}",
                        agent=row.agent,
                        round=row.round,
                    )

        agents = self.agents if self.public_is_trivial else self.all_agents
        for t in range(1, self.horizon + 1):
            for agent in agents:
                allowed = set(self.labels(agent, t))
                for source, public_source, previous in self._kernel_contexts(agent, t):
                    try:
                        outcome = self.successor_distribution(agent, t, source, public_source, previous)
                    except UndefinedKernelEntry as error:
                        raise DanglingKernelEntry(str(error), **error.context) from error
                    unknown = [label for label in outcome.support if label not in allowed]
                    if unknown:
                        logger.error("kernel_validation_failed", agent=agent, round=t, unknown=unknown)
                        raise DanglingKernelEntry(
                            f"Kernel for {agent} from {source!r} produces unknown round-{t} types {unknown}",
                            agent=agent,
                            round=t,
                            source=source,
                        )

    def _validate_utilities(self) -> None:
        for rule in self.utilities:
            if rule.agent not in self.agents:
                raise MissingUtility(f"Utility rule for unknown agent {rule.agent!r}", agent=rule.agent)
            if rule.round is not None and not 1 <= rule.round <= self.horizon:
                raise MissingUtility(
                    f"Utility rule for {rule.agent} in round {rule.round} outside 1..{self.horizon}",
                    agent=rule.agent,
                )
            rounds = [rule.round] if rule.round is not None else list(range(1, self.horizon + 1))
            if not any(
                matches_pattern(rule.public_decision, public)
                for t in rounds
                for public in self.decision_space(t).public
            ):
                raise MissingUtility(
                    f"Utility rule for {rule.agent} matches no public decision "
                    f"{rule.public_decision!r}",
                    agent=rule.agent,
                    decision=rule.public_decision,
                )
            for agent, label in rule.private_decisions:
                if agent not in self.agents or not any(
                    label in self.decision_space(t).private_options(agent) for t in rounds
                ):
                    raise MissingUtility(
                        f"Utility rule for {rule.agent} references unknown private decision "
                        f"{label!r} of {agent!r}",
                        agent=rule.agent,
                    )
            for agent, label in rule.types:
                if agent not in self.all_agents or not any(label in self.labels(agent, t) for t in rounds):
                    raise MissingUtility(
                        f"Utility rule for {rule.agent} references unknown type {label!r} of {agent!r}",
                        agent=rule.agent,
                    )


def validate(spec: GameSpec) -> GameSpec:
    """Validate a game description; returns it unchanged when valid."""
    try:
        return spec.validate()
    except ValidationError as error:
        logger.warning("game_validation_failed", scenario=spec.name, **error.to_dict())
        raise


def successors(
    spec: GameSpec,
    previous: AgentType,
    public_previous: AgentType,
    public_decision: str = NO_DECISION,
    private_decision: str = NO_DECISION,
) -> Distribution:
    """
    Distribution over the next-round AgentType of `previous.agent`.

    Example:
        successors(spec, spec.type_of("blue", 1, "b1:30%"), spec.type_of("public", 1, "-"))
        # {b2:20%: 5/6, b2:80%: 1/6}
    """
    agent = previous.agent
    round_index = previous.round + 1
    private = [NO_DECISION] * len(spec.agents)
    if agent != PUBLIC_AGENT:
        private[spec.agent_position(agent)] = private_decision
    labels = spec.successor_distribution(
        agent, round_index, previous.label, public_previous.label, Action(public_decision, tuple(private))
    )
    return labels.map(lambda label: spec.type_of(agent, round_index, label))


def check_martingale_annotations(spec: GameSpec) -> List[MartingaleViolation]:
    """
    Check that annotated type chains are martingales.

    For every annotated type whose successors are all annotated, the
    annotation must equal the expected successor annotation under every
    kernel context. Violations are returned as data.
    """
    violations: List[MartingaleViolation] = []
    seen = set()
    agents = spec.agents if spec.public_is_trivial else spec.all_agents
    for t in range(1, spec.horizon + 1):
        for agent in agents:
            for source, public_source, previous in spec._kernel_contexts(agent, t):
                annotation = spec.annotation(agent, t - 1, source)
                if annotation is None:
                    continue
                outcome = spec.successor_distribution(agent, t, source, public_source, previous)
                successor_annotations = {label: spec.annotation(agent, t, label) for label in outcome.support}
                if any(value is None for value in successor_annotations.values()):
                    continue
                expectation = outcome.expectation(lambda label: successor_annotations[label])
                key = (agent, t - 1, source, expectation)
                if expectation != annotation and key not in seen:
                    seen.add(key)
                    violations.append(MartingaleViolation(agent, t - 1, source, annotation, expectation))
    if violations:
        logger.warning("martingale_annotations_violated", scenario=spec.name, violations=len(violations))
    return violations
