"""
Monte Carlo Cross-Check

Forward-samples paths of play to estimate expected payoffs with standard
errors. Sampling splits the sample count over each round's branches with
one multinomial draw, so only branches that receive samples are expanded.

Never authoritative: exact values come from enumeration. The estimate only
confirms that the enumerator and the sampler agree.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np
import structlog

from src.core.errors import ValidationError
from src.core.game_spec import GameSpec
from src.mechanisms.base import Mechanism
from src.orchestrator.outcome import PayoffMeasure
from src.orchestrator.play import PlayState, path_utilities, round_branches
from src.strategies.base import StrategyProfile

logger = structlog.get_logger()

DEFAULT_SAMPLES = 100_000
DEFAULT_TOLERANCE = 5


@dataclass(frozen=True)
class MonteCarloEstimate:
    """Sample means and standard errors per agent."""
    agents: Tuple[str, ...]
    mean: Tuple[float, ...]
    stderr: Tuple[float, ...]
    samples: int
    seed: int
    measure: PayoffMeasure = PayoffMeasure.TOTAL

    def within(self, exact: Sequence[Fraction], tolerance: float = DEFAULT_TOLERANCE) -> bool:
        """Whether every exact value lies within `tolerance` standard errors of the mean."""
        for mean, stderr, value in zip(self.mean, self.stderr, exact):
            if abs(mean - float(value)) > tolerance * stderr + 1e-9 * max(1.0, abs(float(value))):
                return False
        return True

    def to_dict(self) -> dict:
        return {
            "samples": self.samples,
            "seed": self.seed,
            "measure": self.measure.value,
            "mean": dict(zip(self.agents, self.mean)),
            "stderr": dict(zip(self.agents, self.stderr)),
        }


def _path_value(spec: GameSpec, mechanism: Mechanism, state: PlayState, measure: PayoffMeasure) -> np.ndarray:
    utility = np.array([float(value) for value in path_utilities(spec, state)])
    ledger = mechanism.ledger(state.reports)
    if measure == PayoffMeasure.UTILITY:
        return utility
    if measure == PayoffMeasure.GAMMA:
        return np.array([float(value) for value in ledger.gamma_totals])
    transfer = np.array([float(value) for value in ledger.totals])
    return transfer if measure == PayoffMeasure.TRANSFER else utility + transfer


def monte_carlo_payoffs(
    spec: GameSpec,
    mechanism: Mechanism,
    profile: StrategyProfile,
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    measure: PayoffMeasure = PayoffMeasure.TOTAL,
) -> MonteCarloEstimate:
    """
    Estimate expected payoffs by seeded forward sampling.

    Example:
        estimate = monte_carlo_payoffs(spec, mechanism, profile, samples=100_000, seed=7)
        estimate.within(expected_payoffs(spec, mechanism, profile).total)
    """
    if samples <= 0:
        raise ValidationError(f"samples must be positive, got {samples}")
    rng = np.random.default_rng(seed)
    agents = len(spec.agents)
    first = np.zeros(agents)
    second = np.zeros(agents)

    frontier = [(PlayState.initial(spec), samples)]
    while frontier:
        state, count = frontier.pop()
        if state.round == spec.horizon:
            value = _path_value(spec, mechanism, state, measure)
            first += count * value
            second += count * value * value
            continue
        branches = list(round_branches(spec, mechanism.policy, profile, state))
        weights = np.array([float(probability) for _, probability in branches])
        counts = rng.multinomial(count, weights / weights.sum())
        for (child, _), child_count in zip(branches, counts):
            if child_count:
                frontier.append((child, int(child_count)))

    mean = first / samples
    variance = np.maximum(second / samples - mean * mean, 0.0)
    stderr = np.sqrt(variance / samples)
    estimate = MonteCarloEstimate(
        tuple(spec.agents),
        tuple(float(value) for value in mean),
        tuple(float(value) for value in stderr),
        samples,
        seed,
        measure,
    )
    logger.debug(
        "monte_carlo_sampled",
        scenario=spec.name,
        mechanism=mechanism.name,
        samples=samples,
        seed=seed,
        mean=list(estimate.mean),
    )
    return estimate
