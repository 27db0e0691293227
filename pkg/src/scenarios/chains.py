"""
Probability Chains - annotated type processes shared by the builders

An annotated agent carries, in every round, the probability that its final
type is HIGH. A chain is given by the probability levels of each round;
transitions follow from the martingale property:
- a level present in the next round is kept
- otherwise the type splits between the nearest lower and upper levels,
  with weights that keep the expected annotation unchanged

Labels read "<prefix><round>:<percent>", e.g. "b1:30%".
"""

from fractions import Fraction
from typing import List, Sequence, Tuple

from src.core.errors import ParseError, ValidationError
from src.core.game_spec import KernelRow, UtilityRule
from src.core.rational import format_percent, format_rat
from src.core.types import AgentType, Distribution

IDLE = "idle"
YES = "YES"
NO = "NO"

Levels = Sequence[Sequence[Fraction]]


def level_label(prefix: str, round_index: int, probability: Fraction) -> str:
    try:
        return f"{prefix}{round_index}:{format_percent(probability)}"
    except ParseError:
        return f"{prefix}{round_index}:{format_rat(probability)}"


def martingale_step(source: Fraction, levels: Sequence[Fraction]) -> Tuple[Tuple[Fraction, Fraction], ...]:
    """
    (level, weight) pairs of the next round's annotation.

    Raises:
        ValidationError: If `source` lies outside the next round's levels
    """
    if source in levels:
        return ((source, Fraction(1)),)
    lower = [level for level in levels if level < source]
    upper = [level for level in levels if level > source]
    if not lower or not upper:
        raise ValidationError(
            f"Probability {source} is not bracketed by the next levels {[str(l) for l in levels]}"
        )
    low, high = max(lower), min(upper)
    up = (source - low) / (high - low)
    return tuple(
        (level, up if level == high else (1 - up if level == low else Fraction(0)))
        for level in levels
    )


def probability_chain(agent: str, prefix: str, levels: Levels) -> Tuple[List[AgentType], List[KernelRow]]:
    """
    Types and kernel rows of an annotated agent.

    Args:
        agent: Agent name
        prefix: Label prefix ("b" for blue)
        levels: Probability levels per round, round 0 first (a single level)

    Example:
        probability_chain("red", "r", [[Fraction(1, 2)], [Fraction(1, 2)], [Fraction(1, 5), Fraction(4, 5)]])
    """
    if len(levels[0]) != 1:
        raise ValidationError(f"Round 0 of {agent} needs a single level, got {len(levels[0])}")
    types = [
        AgentType(agent, round_index, level_label(prefix, round_index, level), Fraction(level))
        for round_index, round_levels in enumerate(levels)
        for level in round_levels
    ]
    kernel = []
    for round_index in range(1, len(levels)):
        for source in levels[round_index - 1]:
            step = martingale_step(source, levels[round_index])
            kernel.append(
                KernelRow(
                    agent,
                    Distribution(tuple((level_label(prefix, round_index, level), w) for level, w in step)),
                    round=round_index,
                    source=level_label(prefix, round_index - 1, source),
                )
            )
    return types, kernel


def idle_chain(agent: str, horizon: int) -> Tuple[List[AgentType], List[KernelRow]]:
    """A passive agent with one label in every round."""
    types = [AgentType(agent, round_index, IDLE) for round_index in range(horizon + 1)]
    return types, [KernelRow(agent, Distribution.point(IDLE))]


def extreme_label(types: Sequence[AgentType], agent: str, round_index: int, highest: bool) -> str:
    """Label with the lowest (or highest) annotation of an agent in a round."""
    candidates = [t for t in types if t.agent == agent and t.round == round_index and t.annotation is not None]
    if not candidates:
        raise ValidationError(f"{agent} has no annotated types in round {round_index}")
    pick = max if highest else min
    return pick(candidates, key=lambda agent_type: agent_type.annotation).label


def yes_utilities(
    round_index: int,
    active: Sequence[Tuple[str, str, str]],
    low: Fraction,
    high: Fraction,
    payers: Sequence[Tuple[str, Fraction]],
    pattern: str = YES,
) -> List[UtilityRule]:
    """
    Utility rules of the final YES decision.

    Args:
        round_index: Final round
        active: (agent, LOW label, HIGH label) per active agent
        low: YES utility of an active agent with LOW final type
        high: YES utility of an active agent with HIGH final type
        payers: (agent, utility) of every agent with a flat YES utility
        pattern: Public-decision pattern selecting YES
    """
    rules = []
    for agent, low_label, high_label in active:
        rules.append(UtilityRule(agent, low, round_index, pattern, types=((agent, low_label),)))
        rules.append(UtilityRule(agent, high, round_index, pattern, types=((agent, high_label),)))
    for agent, value in payers:
        if value != 0:
            rules.append(UtilityRule(agent, value, round_index, pattern))
    return rules
