"""
Core value types: agent types, finite distributions and decisions.

Tenet #7: Immutability by Default
Tenet #5: Make Illegal States Unrepresentable
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, Generic, Hashable, Iterator, Mapping, Optional, Tuple, TypeVar

from .errors import NonUnitDistribution, ValidationError

PUBLIC_AGENT = "public"
NO_DECISION = "-"
WILDCARD = "*"
COMPONENT_SEPARATOR = "|"

T = TypeVar("T", bound=Hashable)


@dataclass(frozen=True)
class AgentType:
    """
    A type label of one agent in one round.

    Attributes:
        agent: Agent name (PUBLIC_AGENT for the public state)
        round: Round index, 0 for the publicly known initial type
        label: Label, unique per (agent, round)
        annotation: Optional probability that the final type is HIGH ("b1:30%")

    Example:
        AgentType("blue", 1, "b1:30%", Fraction(3, 10))
    """
    agent: str
    round: int
    label: str
    annotation: Optional[Fraction] = None

    def __post_init__(self):
        """Validate round index and annotation range."""
        if self.round < 0:
            raise ValidationError(
                f"Round must be non-negative, got {self.round} for {self.agent}:{self.label}",
                agent=self.agent,
                round=self.round,
            )
        if not self.label:
            raise ValidationError(f"Empty type label for agent {self.agent} in round {self.round}")
        if self.annotation is not None and not 0 <= self.annotation <= 1:
            raise ValidationError(
                f"Annotation must be in [0, 1], got {self.annotation} for {self.label}",
                agent=self.agent,
                round=self.round,
                label=self.label,
            )


@dataclass(frozen=True)
class Distribution(Generic[T]):
    """
    Finite distribution with exact weights.

    Weights are non-negative Fractions summing exactly to 1. Outcome order is
    kept as declared; it drives deterministic enumeration order.
    """
    weights: Tuple[Tuple[T, Fraction], ...]

    def __post_init__(self):
        """Validate weights."""
        seen = set()
        total = Fraction(0)
        for outcome, weight in self.weights:
            if outcome in seen:
                raise ValidationError(f"Duplicate outcome {outcome!r} in distribution")
            seen.add(outcome)
            if weight < 0:
                raise NonUnitDistribution(
                    f"Negative weight {weight} for outcome {outcome!r}",
                    outcome=str(outcome),
                    weight=str(weight),
                )
            total += weight
        if total != 1:
            raise NonUnitDistribution(
                f"Weights must sum to 1, got {total}",
                total=str(total),
                outcomes=[str(outcome) for outcome, _ in self.weights],
            )

    @classmethod
    def point(cls, outcome: T) -> "Distribution[T]":
        """Deterministic distribution."""
        return cls(((outcome, Fraction(1)),))

    @classmethod
    def from_mapping(cls, mapping: Mapping[T, Fraction]) -> "Distribution[T]":
        """Build from an ordered mapping outcome -> weight."""
        return cls(tuple((outcome, Fraction(weight)) for outcome, weight in mapping.items()))

    @classmethod
    def uniform(cls, outcomes) -> "Distribution[T]":
        """Uniform distribution over the given outcomes."""
        outcomes = tuple(outcomes)
        return cls(tuple((outcome, Fraction(1, len(outcomes))) for outcome in outcomes))

    def items(self) -> Iterator[Tuple[T, Fraction]]:
        """Outcomes with positive weight, in declaration order."""
        return ((outcome, weight) for outcome, weight in self.weights if weight > 0)

    @property
    def support(self) -> Tuple[T, ...]:
        return tuple(outcome for outcome, _ in self.items())

    def probability(self, outcome: T) -> Fraction:
        for candidate, weight in self.weights:
            if candidate == outcome:
                return weight
        return Fraction(0)

    def expectation(self, value: Callable[[T], Fraction]) -> Fraction:
        return sum((weight * value(outcome) for outcome, weight in self.items()), Fraction(0))

    def map(self, transform: Callable[[T], Any]) -> "Distribution":
        """Push the distribution through `transform`, merging equal images."""
        merged: Dict[Any, Fraction] = {}
        for outcome, weight in self.items():
            image = transform(outcome)
            merged[image] = merged.get(image, Fraction(0)) + weight
        return Distribution.from_mapping(merged)

    def is_point(self) -> bool:
        return len(self.support) == 1

    def to_dict(self) -> dict:
        return {str(outcome): str(weight) for outcome, weight in self.weights}


@dataclass(frozen=True)
class Action:
    """
    One round's decision: the public decision plus one private decision per agent.

    `private` is aligned with GameSpec.agents.
    """
    public: str
    private: Tuple[str, ...] = field(default_factory=tuple)

    @classmethod
    def sentinel(cls, agent_count: int) -> "Action":
        """Decision placeholder for round 0."""
        return cls(NO_DECISION, (NO_DECISION,) * agent_count)

    def label(self) -> str:
        if not self.private or all(label == NO_DECISION for label in self.private):
            return self.public
        return f"{self.public} [{', '.join(self.private)}]"


def matches_pattern(pattern: str, label: str) -> bool:
    """
    Match a decision label against a pattern.

    Composite labels have components joined by "|"; each pattern component
    is either a literal or "*". A bare "*" matches everything.
    """
    if pattern == WILDCARD:
        return True
    pattern_parts = pattern.split(COMPONENT_SEPARATOR)
    label_parts = label.split(COMPONENT_SEPARATOR)
    if len(pattern_parts) != len(label_parts):
        return False
    return all(p == WILDCARD or p == l for p, l in zip(pattern_parts, label_parts))
