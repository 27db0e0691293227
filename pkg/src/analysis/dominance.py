"""
Iterated Elimination of Dominated Strategies

Weak elimination is order dependent, so the order is an explicit choice and
every elimination is recorded in a replayable trace:

- ROUND_ROBIN: in each stage every table agent in turn removes its first
  dominated strategy, judged against what is left at that moment
- SIMULTANEOUS: in each stage all strategies dominated at the start of the
  stage are removed together

The dominator recorded for a strategy is the first remaining strategy that
dominates it.
"""

from dataclasses import dataclass
from enum import Enum
from itertools import product
from typing import List, Optional, Sequence, Tuple

import structlog

from .normal_form import NormalForm

logger = structlog.get_logger()


class DominanceMode(Enum):
    STRICT = "strict"
    WEAK = "weak"


class EliminationOrder(Enum):
    ROUND_ROBIN = "round-robin"
    SIMULTANEOUS = "simultaneous"


@dataclass(frozen=True)
class EliminationStep:
    stage: int
    agent: str
    eliminated: str
    dominator: str
    mode: DominanceMode

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "agent": self.agent,
            "eliminated": self.eliminated,
            "dominator": self.dominator,
            "mode": self.mode.value,
        }


@dataclass(frozen=True)
class EliminationTrace:
    """Ordered eliminations; `replay` re-verifies each against its stage."""
    steps: Tuple[EliminationStep, ...]
    mode: DominanceMode
    order: EliminationOrder

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "order": self.order.value,
            "steps": [step.to_dict() for step in self.steps],
        }

    def replay(self, normal_form: NormalForm) -> bool:
        return verify_trace(normal_form, self)


def dominates(
    normal_form: NormalForm,
    agent: str,
    dominator: str,
    dominated: str,
    remaining: Sequence[Sequence[str]],
    mode: DominanceMode,
) -> bool:
    """
    Whether `dominator` dominates `dominated` for `agent` against the
    remaining strategies of the other table agents.
    """
    if dominator == dominated:
        return False
    index = normal_form.position(agent)
    others = [names if position != index else (None,) for position, names in enumerate(remaining)]
    strictly_somewhere = False
    for cell in product(*others):
        better = normal_form.payoffs[cell[:index] + (dominator,) + cell[index + 1:]][index]
        worse = normal_form.payoffs[cell[:index] + (dominated,) + cell[index + 1:]][index]
        if better < worse:
            return False
        if better == worse:
            if mode == DominanceMode.STRICT:
                return False
        else:
            strictly_somewhere = True
    return strictly_somewhere


def _first_dominated(
    normal_form: NormalForm,
    agent: str,
    remaining: Sequence[Sequence[str]],
    mode: DominanceMode,
) -> Optional[Tuple[str, str]]:
    names = remaining[normal_form.position(agent)]
    for candidate in names:
        for dominator in names:
            if dominates(normal_form, agent, dominator, candidate, remaining, mode):
                return candidate, dominator
    return None


def _without(remaining: List[List[str]], index: int, name: str) -> None:
    remaining[index] = [other for other in remaining[index] if other != name]


def eliminate_dominated(
    normal_form: NormalForm,
    mode: DominanceMode = DominanceMode.WEAK,
    order: EliminationOrder = EliminationOrder.ROUND_ROBIN,
) -> Tuple[NormalForm, EliminationTrace]:
    """
    Iterate elimination to a fixpoint.

    Returns:
        (reduced normal form, trace)

    Example:
        reduced, trace = eliminate_dominated(nf, DominanceMode.WEAK)
        reduced.strategies  # (("double",), ("double",)) for the three-strategy Example 1 table
    """
    remaining = [list(names) for names in normal_form.strategies]
    steps: List[EliminationStep] = []
    stage = 0
    while True:
        stage += 1
        removed: List[EliminationStep] = []
        if order == EliminationOrder.ROUND_ROBIN:
            for agent in normal_form.agents:
                found = _first_dominated(normal_form, agent, remaining, mode)
                if found is not None:
                    removed.append(EliminationStep(stage, agent, found[0], found[1], mode))
                    _without(remaining, normal_form.position(agent), found[0])
        else:
            snapshot = [list(names) for names in remaining]
            for agent in normal_form.agents:
                names = snapshot[normal_form.position(agent)]
                for candidate in names:
                    dominator = next(
                        (d for d in names if dominates(normal_form, agent, d, candidate, snapshot, mode)),
                        None,
                    )
                    if dominator is not None:
                        removed.append(EliminationStep(stage, agent, candidate, dominator, mode))
            for step in removed:
                _without(remaining, normal_form.position(step.agent), step.eliminated)
        if not removed:
            break
        for step in removed:
            logger.info("strategy_eliminated", **step.to_dict())
        steps.extend(removed)

    trace = EliminationTrace(tuple(steps), mode, order)
    return normal_form.restrict(remaining), trace


def _justified(normal_form: NormalForm, step: EliminationStep, remaining: Sequence[Sequence[str]]) -> bool:
    names = remaining[normal_form.position(step.agent)]
    if step.eliminated not in names or step.dominator not in names:
        return False
    return dominates(normal_form, step.agent, step.dominator, step.eliminated, remaining, step.mode)


def verify_trace(normal_form: NormalForm, trace: EliminationTrace) -> bool:
    """Re-check every recorded elimination against the table at its stage."""
    remaining = [list(names) for names in normal_form.strategies]
    stages = sorted({step.stage for step in trace.steps})
    for stage in stages:
        stage_steps = [step for step in trace.steps if step.stage == stage]
        if trace.order == EliminationOrder.SIMULTANEOUS:
            snapshot = [list(names) for names in remaining]
            for step in stage_steps:
                if not _justified(normal_form, step, snapshot):
                    return False
            for step in stage_steps:
                _without(remaining, normal_form.position(step.agent), step.eliminated)
        else:
            for step in stage_steps:
                if not _justified(normal_form, step, remaining):
                    return False
                _without(remaining, normal_form.position(step.agent), step.eliminated)
    return True
