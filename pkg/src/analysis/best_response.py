"""
Best-Response Engine - backward induction over information sets

A set of chooser agents picks reports and private decisions jointly while
every other agent follows its strategy. The choosers either maximize the
payoff of a measured group of agents (a best response, or a coalition's
joint deviation) or minimize it (adversarial opponents of one target).

The choosers' information:
- MAX: the pooled observations of the choosers (own types, all reports,
  public decisions, own private decisions, revealed types)
- MIN: the whole history except the true types of the target

Both have perfect recall, so each information set is solved by comparing
actions under the reach-weighted values of the subtrees below it.

Tenet #3: Explicit Over Clever - ties go to the first action in declaration order
"""

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import structlog

from src.core.errors import ResourceLimitExceeded, ValidationError
from src.core.game_spec import GameSpec
from src.core.types import PUBLIC_AGENT, Action
from src.mechanisms.base import Mechanism
from src.orchestrator.play import PlayState, strategy_decision, strategy_report
from src.strategies.base import StrategyProfile

logger = structlog.get_logger()

DEFAULT_MAX_NODES = 2_000_000

NATURE = "nature"
REPORT = "report"
REPORT_OTHERS = "report_others"
DECIDE = "decide"
DECIDE_OTHERS = "decide_others"
TERMINAL = "terminal"

_CHOICE_PHASES = (REPORT, DECIDE)
_MASK = "?"


class Objective(Enum):
    """Direction of the choosers' optimization."""
    MAX = "max"
    MIN = "min"


@dataclass(frozen=True)
class _Node:
    phase: str
    state: PlayState
    pending: Tuple[str, ...] = ()


@dataclass(frozen=True)
class _Edge:
    child: _Node
    probability: Fraction
    reward: Fraction


@dataclass(frozen=True)
class BestResponse:
    """Optimal value of the choosers with tree statistics."""
    value: Fraction
    objective: Objective
    choosers: Tuple[str, ...]
    measured: Tuple[str, ...]
    nodes: int
    information_sets: int

    def to_dict(self) -> dict:
        return {
            "value": str(self.value),
            "objective": self.objective.value,
            "choosers": list(self.choosers),
            "measured": list(self.measured),
            "nodes": self.nodes,
            "information_sets": self.information_sets,
        }


class PlayTree:
    """
    Game tree of one scenario seen from a chooser group.

    Example:
        tree = PlayTree(spec, mechanism, StrategyProfile(spec), choosers=("blue",),
                        measured=("blue",), objective=Objective.MAX)
        tree.solve().value
    """

    def __init__(
        self,
        spec: GameSpec,
        mechanism: Mechanism,
        profile: StrategyProfile,
        choosers: Sequence[str],
        measured: Sequence[str],
        objective: Objective,
        target: Optional[str] = None,
        max_nodes: int = DEFAULT_MAX_NODES,
    ):
        for agent in tuple(choosers) + tuple(measured):
            spec.agent_position(agent)
        if objective == Objective.MIN and target is None:
            raise ValidationError("A MIN objective needs the target agent whose types stay hidden")
        self.spec = spec
        self.mechanism = mechanism
        self.profile = profile
        self.choosers = tuple(agent for agent in spec.agents if agent in choosers)
        self.measured = tuple(measured)
        self.objective = objective
        self.target = target
        self.max_nodes = max_nodes

        self._measured_positions = tuple(spec.agent_position(agent) for agent in self.measured)
        self._chooser_positions = tuple(spec.profile_position(agent) for agent in self.choosers)
        self._chooser_private = tuple(spec.agent_position(agent) for agent in self.choosers)
        self._revealed_positions = tuple(
            spec.profile_position(other)
            for other in spec.agents
            if other not in self.choosers
            and any(spec.is_revealed_to(chooser, other) for chooser in self.choosers)
        )
        self._target_position = spec.profile_position(target) if target is not None else None

        self._edges: Dict[_Node, List[_Edge]] = {}
        self._options: Dict[_Node, Tuple[Tuple[str, ...], ...]] = {}
        self._infosets: Dict[tuple, List[Tuple[_Node, Fraction]]] = {}
        self._values: Dict[_Node, Fraction] = {}
        self._choices: Dict[tuple, int] = {}
        self.root = _Node(NATURE if spec.horizon > 0 else TERMINAL, PlayState.initial(spec))
        self._explore()

    # ------------------------------------------------------------------
    # Tree construction
    # ------------------------------------------------------------------

    def _measure(self, vector: Sequence[Fraction]) -> Fraction:
        return sum((vector[position] for position in self._measured_positions), Fraction(0))

    def _explore(self) -> None:
        stack = [(self.root, Fraction(1))]
        while stack:
            node, reach = stack.pop()
            if node.phase in _CHOICE_PHASES:
                self._infosets.setdefault(self.information_key(node), []).append((node, reach))
            edges = self._expand(node)
            for edge in edges:
                weight = reach if node.phase in _CHOICE_PHASES else reach * edge.probability
                stack.append((edge.child, weight))
        logger.debug(
            "play_tree_built",
            scenario=self.spec.name,
            choosers=list(self.choosers),
            objective=self.objective.value,
            nodes=len(self._edges),
            information_sets=len(self._infosets),
        )

    def _expand(self, node: _Node) -> List[_Edge]:
        if node.phase == TERMINAL:
            return []
        edges = self._edges.get(node)
        if edges is not None:
            return edges
        if len(self._edges) >= self.max_nodes:
            logger.error("play_tree_limit", scenario=self.spec.name, limit=self.max_nodes)
            raise ResourceLimitExceeded(
                f"Game tree exceeded {self.max_nodes} nodes", limit=self.max_nodes, scenario=self.spec.name
            )

        spec, state = self.spec, node.state
        if node.phase == NATURE:
            round_index = state.round + 1
            edges = [
                _Edge(_Node(REPORT, state.with_types(types)), probability, Fraction(0))
                for types, probability in spec.joint_successors(
                    round_index, state.types[-1], state.last_action(spec)
                )
            ]
        elif node.phase == REPORT:
            options = tuple(product(*(spec.labels(agent, state.round) for agent in self.choosers)))
            self._options[node] = options
            edges = [_Edge(_Node(REPORT_OTHERS, state, option), Fraction(1), Fraction(0)) for option in options]
        elif node.phase == REPORT_OTHERS:
            edges = self._report_edges(node)
        elif node.phase == DECIDE:
            space = spec.decision_space(state.round)
            options = tuple(product(*(space.private_options(agent) for agent in self.choosers)))
            self._options[node] = options
            edges = [_Edge(_Node(DECIDE_OTHERS, state, option), Fraction(1), Fraction(0)) for option in options]
        else:
            edges = self._decision_edges(node)
        self._edges[node] = edges
        return edges

    def _report_edges(self, node: _Node) -> List[_Edge]:
        spec, state = self.spec, node.state
        round_index = state.round
        factors = []
        for agent in spec.all_agents:
            if agent in self.choosers:
                factors.append(((node.pending[self.choosers.index(agent)], Fraction(1)),))
            elif agent == PUBLIC_AGENT:
                factors.append(((state.types[-1][0], Fraction(1)),))
            else:
                factors.append(tuple(strategy_report(spec, self.profile, state, agent).items()))
        edges = []
        for combination in product(*factors):
            probability = Fraction(1)
            for _, weight in combination:
                probability *= weight
            reports = tuple(label for label, _ in combination)
            transfers = self.mechanism.transfers(round_index, state.reports[-1], reports)
            edges.append(
                _Edge(_Node(DECIDE, state.with_reports(reports)), probability, self._measure(transfers.net))
            )
        return edges

    def _decision_edges(self, node: _Node) -> List[_Edge]:
        spec, state = self.spec, node.state
        round_index = state.round
        recommended = self.mechanism.policy.decide(round_index, state.reports[-1])
        factors = []
        for index, agent in enumerate(spec.agents):
            if agent in self.choosers:
                factors.append(((node.pending[self.choosers.index(agent)], Fraction(1)),))
            else:
                distribution = strategy_decision(spec, self.profile, state, agent, recommended.private[index])
                factors.append(tuple(distribution.items()))
        following_phase = TERMINAL if round_index == spec.horizon else NATURE
        edges = []
        for combination in product(*factors):
            probability = Fraction(1)
            for _, weight in combination:
                probability *= weight
            action = Action(recommended.public, tuple(label for label, _ in combination))
            reward = self._measure(spec.utility(round_index, action, state.types[round_index]))
            edges.append(_Edge(_Node(following_phase, state.with_action(action)), probability, reward))
        return edges

    # ------------------------------------------------------------------
    # Information
    # ------------------------------------------------------------------

    def information_key(self, node: _Node) -> tuple:
        """What the choosers know at a choice node."""
        state = node.state
        if self.objective == Objective.MIN:
            target = self._target_position
            hidden = tuple(
                profile if round_index == 0 else profile[:target] + (_MASK,) + profile[target + 1:]
                for round_index, profile in enumerate(state.types)
            )
            return (node.phase, hidden, state.reports, state.actions)

        own = tuple(tuple(profile[position] for profile in state.types) for position in self._chooser_positions)
        revealed = tuple(
            tuple(profile[position] for profile in state.types[: state.round])
            for position in self._revealed_positions
        )
        private = tuple(
            tuple(action.private[position] for action in state.actions) for position in self._chooser_private
        )
        public = tuple(action.public for action in state.actions)
        return (node.phase, own, revealed, state.reports, public, private)

    # ------------------------------------------------------------------
    # Backward induction
    # ------------------------------------------------------------------

    def _value(self, node: _Node) -> Fraction:
        cached = self._values.get(node)
        if cached is not None:
            return cached
        if node.phase == TERMINAL:
            value = Fraction(0)
        elif node.phase in _CHOICE_PHASES:
            edge = self._edges[node][self._best_choice(self.information_key(node))]
            value = edge.reward + self._value(edge.child)
        else:
            value = sum(
                (edge.probability * (edge.reward + self._value(edge.child)) for edge in self._edges[node]),
                Fraction(0),
            )
        self._values[node] = value
        return value

    def _best_choice(self, key: tuple) -> int:
        cached = self._choices.get(key)
        if cached is not None:
            return cached
        members = self._infosets[key]
        count = len(self._edges[members[0][0]])
        best_index, best_score = 0, None
        for index in range(count):
            score = Fraction(0)
            for node, reach in members:
                edge = self._edges[node][index]
                score += reach * (edge.reward + self._value(edge.child))
            if best_score is None or self._better(score, best_score):
                best_index, best_score = index, score
        self._choices[key] = best_index
        return best_index

    def _better(self, score: Fraction, incumbent: Fraction) -> bool:
        return score > incumbent if self.objective == Objective.MAX else score < incumbent

    def solve(self) -> BestResponse:
        value = self._value(self.root)
        return BestResponse(
            value=value,
            objective=self.objective,
            choosers=self.choosers,
            measured=self.measured,
            nodes=len(self._edges),
            information_sets=len(self._infosets),
        )

    def chosen_options(self) -> Iterable[Tuple[tuple, Tuple[str, ...]]]:
        """(information set, chosen labels) for every solved choice point."""
        for key, index in self._choices.items():
            node = self._infosets[key][0][0]
            yield key, self._options[node][index]


def best_response_value(
    spec: GameSpec,
    mechanism: Mechanism,
    agent: str,
    profile: Optional[StrategyProfile] = None,
    objective: Objective = Objective.MAX,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Fraction:
    """
    Exact optimum of `agent`'s expected payoff.

    MAX: `agent` best-responds over all behavioral strategies within its
    report and decision alphabets against the others' strategies in
    `profile`. MIN: `agent` keeps its strategy from `profile` and all other
    agents jointly minimize its payoff without seeing its types.

    Example:
        best_response_value(spec, mechanism, "blue", objective=Objective.MIN)
        # equals the guarantee C^blue under the sequential-update rule
    """
    profile = profile or StrategyProfile(spec)
    if objective == Objective.MAX:
        choosers: Tuple[str, ...] = (agent,)
    else:
        choosers = tuple(other for other in spec.agents if other != agent)
    tree = PlayTree(spec, mechanism, profile, choosers, (agent,), objective, target=agent, max_nodes=max_nodes)
    result = tree.solve()
    logger.info(
        "best_response_computed",
        scenario=spec.name,
        mechanism=mechanism.name,
        agent=agent,
        objective=objective.value,
        value=str(result.value),
        nodes=result.nodes,
    )
    return result.value


def coalition_value(
    spec: GameSpec,
    mechanism: Mechanism,
    coalition: Sequence[str],
    profile: Optional[StrategyProfile] = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> Fraction:
    """
    Maximal joint expected payoff of a coalition against the others' strategies.

    Coalition members pool their information and choose jointly; outsiders
    follow `profile` (truthful by default).
    """
    if not coalition:
        raise ValidationError("A coalition needs at least one agent")
    profile = profile or StrategyProfile(spec)
    tree = PlayTree(
        spec, mechanism, profile, tuple(coalition), tuple(coalition), Objective.MAX, max_nodes=max_nodes
    )
    result = tree.solve()
    logger.info(
        "coalition_value_computed",
        scenario=spec.name,
        mechanism=mechanism.name,
        coalition=list(coalition),
        value=str(result.value),
    )
    return result.value
