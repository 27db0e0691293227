"""
Scripted Strategies

Binds a parsed script to a game and an agent, then evaluates it on
observations. Binding rejects references the agent can never observe:
unknown agents or labels, reports of the current or a later round when
reporting, and types of agents not revealed to it.

Rules without a fixed round (`default`, `decide *`) are checked again on
every observation.

Tenet #4: Fail Loud, Fail Early
"""

import zlib
from fractions import Fraction
from typing import Optional, Tuple

import numpy as np
import structlog

from src.core.errors import ParseError, UnboundScriptReference, UnreachableObservation
from src.core.game_spec import GameSpec
from src.core.types import Distribution

from .base import Observation, ObservationPhase, Strategy
from .script import (
    AnnotationTest,
    BoolOp,
    Condition,
    Conditional,
    Expr,
    Follow,
    LabelTest,
    Literal,
    Mixture,
    Not,
    RandomChoice,
    Ref,
    ReportRef,
    Rule,
    Script,
    Truth,
    TypeRef,
    parse_script,
)

logger = structlog.get_logger()

RANDOM_WEIGHT_RANGE = (1, 5)


class ScriptedStrategy(Strategy):
    """
    Strategy defined by a script.

    Rounds without a report rule report truthfully; rounds without a
    decide rule follow the recommendation.
    """

    def __init__(self, spec: GameSpec, agent: str, name: str, script: Script):
        super().__init__(agent, name)
        self.spec = spec
        self.script = script
        self._mixtures = {}
        for rule in script.rules:
            _bind_rule(spec, agent, rule, self._mixtures)

    @property
    def text(self) -> str:
        return self.script.text

    def report(self, spec: GameSpec, observation: Observation) -> Distribution:
        rule = self.script.rule_for(ObservationPhase.REPORT, observation.round)
        if rule is None:
            return Distribution.point(observation.current_type)
        result = self._evaluate(rule.body, observation)
        allowed = spec.labels(self.agent, observation.round)
        unknown = [label for label in result.support if label not in allowed]
        if unknown:
            raise UnboundScriptReference(
                f"Strategy {self.name!r} of {self.agent} reports {unknown} in round {observation.round}",
                agent=self.agent,
                round=observation.round,
            )
        return result

    def decide(self, spec: GameSpec, observation: Observation) -> Distribution:
        rule = self.script.rule_for(ObservationPhase.DECIDE, observation.round)
        if rule is None:
            return super().decide(spec, observation)
        result = self._evaluate(rule.body, observation)
        allowed = spec.decision_space(observation.round).private_options(self.agent)
        unknown = [label for label in result.support if label not in allowed]
        if unknown:
            raise UnboundScriptReference(
                f"Strategy {self.name!r} of {self.agent} chooses {unknown} in round {observation.round}",
                agent=self.agent,
                round=observation.round,
            )
        return result

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def _evaluate(self, expr: Expr, observation: Observation) -> Distribution:
        if isinstance(expr, Conditional):
            branch = expr.then if self._holds(expr.condition, observation) else expr.otherwise
            return self._evaluate(branch, observation)
        if isinstance(expr, Truth):
            return Distribution.point(observation.current_type)
        if isinstance(expr, Follow):
            return super().decide(self.spec, observation)
        if isinstance(expr, Literal):
            return Distribution.point(expr.label)
        if isinstance(expr, Mixture):
            return self._mixtures[expr]
        if isinstance(expr, RandomChoice):
            return self._random(expr.seed, observation)
        raise TypeError(f"Unknown expression {expr!r}")

    def _holds(self, condition: Condition, observation: Observation) -> bool:
        if isinstance(condition, BoolOp):
            left = self._holds(condition.left, observation)
            if condition.op == "and":
                return left and self._holds(condition.right, observation)
            return left or self._holds(condition.right, observation)
        if isinstance(condition, Not):
            return not self._holds(condition.operand, observation)
        if isinstance(condition, LabelTest):
            equal = self._resolve(condition.ref, observation) == condition.label
            return equal != condition.negate
        if isinstance(condition, AnnotationTest):
            agent, round_index = _ref_owner(self.agent, condition.ref), condition.ref.round
            label = self._resolve(condition.ref, observation)
            annotation = self.spec.annotation(agent, round_index, label)
            if annotation is None:
                raise UnboundScriptReference(
                    f"Type {label!r} of {agent} in round {round_index} has no probability annotation",
                    agent=agent,
                    round=round_index,
                    column=condition.column,
                )
            return _compare(annotation, condition.op, condition.value)
        raise TypeError(f"Unknown condition {condition!r}")

    def _resolve(self, ref: Ref, observation: Observation) -> str:
        if isinstance(ref, ReportRef):
            try:
                return observation.report_of(ref.agent, ref.round)
            except UnreachableObservation as error:
                raise UnboundScriptReference(str(error), column=ref.column, **error.context) from error
        if ref.agent is None:
            if ref.round < len(observation.own_types):
                return observation.own_types[ref.round]
        else:
            revealed = observation.revealed_type(ref.agent, ref.round)
            if revealed is not None:
                return revealed
        raise UnboundScriptReference(
            f"{self.agent} cannot observe the round-{ref.round} type of {_ref_owner(self.agent, ref)} "
            f"in round {observation.round}",
            agent=self.agent,
            round=observation.round,
            column=ref.column,
        )

    def _random(self, seed: int, observation: Observation) -> Distribution:
        """Seeded pseudo-random answer, a fixed function of the observation."""
        fingerprint = zlib.crc32(repr(observation.key()).encode("utf-8"))
        rng = np.random.default_rng([seed, fingerprint])
        if observation.phase == ObservationPhase.REPORT:
            alphabet = self.spec.labels(self.agent, observation.round)
            weights = rng.integers(*RANDOM_WEIGHT_RANGE, size=len(alphabet))
            total = int(weights.sum())
            return Distribution(
                tuple((label, Fraction(int(weight), total)) for label, weight in zip(alphabet, weights))
            )
        options = self.spec.decision_space(observation.round).private_options(self.agent)
        return Distribution.point(options[int(rng.integers(len(options)))])


def _compare(value: Fraction, op: str, threshold: Fraction) -> bool:
    if op == "<":
        return value < threshold
    if op == "<=":
        return value <= threshold
    if op == ">":
        return value > threshold
    if op == ">=":
        return value >= threshold
    if op == "==":
        return value == threshold
    return value != threshold


def _ref_owner(agent: str, ref: Ref) -> str:
    if isinstance(ref, TypeRef) and ref.agent is None:
        return agent
    return ref.agent


# ----------------------------------------------------------------------
# Binding
# ----------------------------------------------------------------------


def _bind_rule(spec: GameSpec, agent: str, rule: Rule, mixtures: dict) -> None:
    if rule.round is not None and not 1 <= rule.round <= spec.horizon:
        raise UnboundScriptReference(
            f"Rule for round {rule.round} outside 1..{spec.horizon}",
            agent=agent,
            column=rule.column,
        )
    _bind_expr(spec, agent, rule.phase, rule.round, rule.body, mixtures)


def _bind_expr(
    spec: GameSpec,
    agent: str,
    phase: ObservationPhase,
    round_index: Optional[int],
    expr: Expr,
    mixtures: dict,
) -> None:
    if isinstance(expr, Conditional):
        _bind_condition(spec, agent, phase, round_index, expr.condition)
        _bind_expr(spec, agent, phase, round_index, expr.then, mixtures)
        _bind_expr(spec, agent, phase, round_index, expr.otherwise, mixtures)
    elif isinstance(expr, Truth):
        if phase != ObservationPhase.REPORT:
            raise UnboundScriptReference("'truth' is a report, not a decision", agent=agent, column=expr.column)
    elif isinstance(expr, Follow):
        if phase != ObservationPhase.DECIDE:
            raise UnboundScriptReference("'follow' is a decision, not a report", agent=agent, column=expr.column)
    elif isinstance(expr, Literal):
        _bind_choice(spec, agent, phase, round_index, expr.label, expr.column)
    elif isinstance(expr, Mixture):
        for label, _ in expr.entries:
            _bind_choice(spec, agent, phase, round_index, label, expr.column)
        mixtures[expr] = Distribution(expr.entries)


def _choice_alphabet(spec: GameSpec, agent: str, phase: ObservationPhase, round_index: int) -> Tuple[str, ...]:
    if phase == ObservationPhase.REPORT:
        return spec.labels(agent, round_index)
    return spec.decision_space(round_index).private_options(agent)


def _bind_choice(
    spec: GameSpec,
    agent: str,
    phase: ObservationPhase,
    round_index: Optional[int],
    label: str,
    column: int,
) -> None:
    rounds = [round_index] if round_index is not None else range(1, spec.horizon + 1)
    if not any(label in _choice_alphabet(spec, agent, phase, t) for t in rounds):
        where = f"round {round_index}" if round_index is not None else "any round"
        raise UnboundScriptReference(
            f"{label!r} is not a {phase.value} option of {agent} in {where}",
            agent=agent,
            label=label,
            column=column,
        )


def _bind_condition(
    spec: GameSpec,
    agent: str,
    phase: ObservationPhase,
    round_index: Optional[int],
    condition: Condition,
) -> None:
    if isinstance(condition, BoolOp):
        _bind_condition(spec, agent, phase, round_index, condition.left)
        _bind_condition(spec, agent, phase, round_index, condition.right)
    elif isinstance(condition, Not):
        _bind_condition(spec, agent, phase, round_index, condition.operand)
    else:
        _bind_ref(spec, agent, phase, round_index, condition.ref)
        if isinstance(condition, LabelTest):
            owner = _ref_owner(agent, condition.ref)
            if condition.label not in spec.labels(owner, condition.ref.round):
                raise UnboundScriptReference(
                    f"{condition.label!r} is not a round-{condition.ref.round} type of {owner}",
                    agent=agent,
                    column=condition.column,
                )


def _bind_ref(
    spec: GameSpec,
    agent: str,
    phase: ObservationPhase,
    round_index: Optional[int],
    ref: Ref,
) -> None:
    owner = _ref_owner(agent, ref)
    if owner not in spec.all_agents:
        raise UnboundScriptReference(f"Unknown agent {owner!r}", agent=agent, column=ref.column)
    if not 0 <= ref.round <= spec.horizon:
        raise UnboundScriptReference(
            f"Round {ref.round} outside 0..{spec.horizon}", agent=agent, column=ref.column
        )

    if isinstance(ref, ReportRef):
        latest = None if round_index is None else (
            round_index - 1 if phase == ObservationPhase.REPORT else round_index
        )
        kind = "report"
    elif ref.agent is None:
        latest = round_index
        kind = "own type"
    else:
        if not spec.is_revealed_to(agent, ref.agent):
            raise UnboundScriptReference(
                f"The types of {ref.agent} are not revealed to {agent}", agent=agent, column=ref.column
            )
        latest = None if round_index is None else round_index - 1
        kind = "revealed type"

    if latest is not None and ref.round > latest:
        raise UnboundScriptReference(
            f"The round-{ref.round} {kind} of {owner} is not observable in round {round_index}",
            agent=agent,
            column=ref.column,
        )


def compile_script(spec: GameSpec, agent: str, text: str, name: Optional[str] = None) -> ScriptedStrategy:
    """
    Parse and bind a strategy script.

    Args:
        spec: Validated game
        agent: Agent playing the strategy
        text: Script source
        name: Strategy name (defaults to the script text)

    Raises:
        ParseError: Grammar violations
        UnboundScriptReference: References the agent cannot observe
        NonUnitDistribution: Mixture weights not summing to 1

    Example:
        compile_script(spec, "blue", "round 1 => b1:0%; round 2 => if report[red@1] == r1:0% then b2:100% else truth")
    """
    spec.agent_position(agent)
    try:
        script = parse_script(text)
        strategy = ScriptedStrategy(spec, agent, name or text, script)
    except (ParseError, UnboundScriptReference) as error:
        logger.warning("script_compile_failed", script_agent=agent, strategy=name, **error.to_dict())
        raise
    logger.debug("script_compiled", agent=agent, strategy=strategy.name, rules=len(script.rules))
    return strategy
