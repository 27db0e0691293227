"""
Report-Price Identities

For two-agent probability games (types annotated with the probability of
a HIGH final type) the expected total report price of a focal agent f
against a second agent s has a closed form in the report errors
delta_t = p_hat_t - p_t:

    E gamma^f = c * E[ sum_{t=1}^{k-1} (ds_t - ds_{t-1}) df_t - ds_{k-1} df_k
                       + ps_0 pf_0 - ps_k p_hat f_k ]

where c is the scenario's price coefficient. When f is truthful in even
rounds and s in odd rounds (and both at 0 and k) this reduces to a sum of
cross terms only:

    E gamma^b = c * sum_s E(-dr_{2s} db_{2s+1})
    E gamma^r = c * sum_s E(-db_{2s-1} dr_{2s})

The left-hand sides are read from the mechanism's ledgers, the right-hand
sides from the paths' annotations; both are exact.
"""

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Optional, Sequence, Tuple

import structlog

from src.core.errors import HypothesisViolated
from src.core.game_spec import GameSpec
from src.mechanisms.balanced_team import BalancedTeamMechanism
from src.mechanisms.base import Mechanism
from src.orchestrator.outcome import PlayPath
from src.orchestrator.play import DEFAULT_MAX_PATHS, enumerate_paths
from src.strategies.base import StrategyProfile

logger = structlog.get_logger()

PARITY = "parity"
GENERAL = "general"


@dataclass(frozen=True)
class DeltaTrace:
    """
    True and reported probabilities of one agent along one path.

    `true[t]`, `reported[t]` and `delta[t]` cover rounds 0..k.
    """
    agent: str
    true: Tuple[Fraction, ...]
    reported: Tuple[Fraction, ...]

    @property
    def delta(self) -> Tuple[Fraction, ...]:
        return tuple(r - p for p, r in zip(self.true, self.reported))

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "true": [str(value) for value in self.true],
            "reported": [str(value) for value in self.reported],
            "delta": [str(value) for value in self.delta],
        }


def delta_trace(spec: GameSpec, path: PlayPath, agent: str) -> DeltaTrace:
    """
    Annotations of `agent`'s true and reported types along `path`.

    Raises:
        HypothesisViolated: If a visited type carries no annotation
    """
    position = spec.profile_position(agent)
    true, reported = [], []
    for round_index, (types, reports) in enumerate(zip(path.types, path.reports)):
        for label, target in ((types[position], true), (reports[position], reported)):
            annotation = spec.annotation(agent, round_index, label)
            if annotation is None:
                raise HypothesisViolated(
                    f"Type {label!r} of {agent} in round {round_index} has no probability annotation",
                    agent=agent,
                    round=round_index,
                    label=label,
                )
            target.append(annotation)
    return DeltaTrace(agent, tuple(true), tuple(reported))


@dataclass(frozen=True)
class LemmaCheck:
    """Both sides of the report-price identity for an agent pair."""
    kind: str
    agents: Tuple[str, str]
    lhs: Tuple[Fraction, Fraction]
    rhs: Tuple[Fraction, Fraction]
    coefficient: Fraction
    paths: int

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "holds": self.holds,
            "coefficient": str(self.coefficient),
            "paths": self.paths,
            "agents": {
                agent: {"lhs": str(left), "rhs": str(right)}
                for agent, left, right in zip(self.agents, self.lhs, self.rhs)
            },
        }


def _pair(spec: GameSpec, agents: Optional[Sequence[str]]) -> Tuple[str, str]:
    pair = tuple(agents) if agents is not None else tuple(spec.agents[:2])
    if len(pair) != 2 or pair[0] == pair[1]:
        raise HypothesisViolated(f"The identity concerns two distinct agents, got {list(pair)}")
    for agent in pair:
        spec.agent_position(agent)
    return pair  # type: ignore[return-value]


def _traced_paths(
    spec: GameSpec,
    mechanism: Mechanism,
    profile: StrategyProfile,
    pair: Tuple[str, str],
    max_paths: int,
) -> Iterable[Tuple[PlayPath, DeltaTrace, DeltaTrace]]:
    for path in enumerate_paths(spec, mechanism, profile, max_paths):
        yield path, delta_trace(spec, path, pair[0]), delta_trace(spec, path, pair[1])


def _expected_gamma(
    spec: GameSpec, weighted: Iterable[PlayPath], pair: Tuple[str, str]
) -> Tuple[Fraction, Fraction]:
    totals = [Fraction(0), Fraction(0)]
    for path in weighted:
        gamma = path.ledger.gamma_totals
        for index, agent in enumerate(pair):
            totals[index] += path.probability * gamma[spec.agent_position(agent)]
    return totals[0], totals[1]


def _check_parity(pair: Tuple[str, str], first: DeltaTrace, second: DeltaTrace, horizon: int) -> None:
    for round_index in range(horizon + 1):
        boundary = round_index in (0, horizon)
        if (boundary or round_index % 2 == 0) and first.delta[round_index] != 0:
            raise HypothesisViolated(
                f"{pair[0]} must report truthfully in round {round_index}",
                agent=pair[0],
                round=round_index,
            )
        if (boundary or round_index % 2 == 1) and second.delta[round_index] != 0:
            raise HypothesisViolated(
                f"{pair[1]} must report truthfully in round {round_index}",
                agent=pair[1],
                round=round_index,
            )


def lemma_parity_check(
    spec: GameSpec,
    profile: StrategyProfile,
    coefficient: Fraction,
    mechanism: Optional[Mechanism] = None,
    agents: Optional[Sequence[str]] = None,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> LemmaCheck:
    """
    Compare expected report prices with the alternating-truth closed form.

    Args:
        spec: Game with annotated types for both agents
        profile: Profile under test
        coefficient: Price coefficient c (2 for utilities (1, 4, -6), 100 for (84, 104, -204))
        mechanism: Pricing rule (balanced team rule by default)
        agents: (first, second); the first is truthful in even rounds, the
                second in odd rounds, both in rounds 0 and k

    Raises:
        HypothesisViolated: Naming the agent and round of the first
                            reachable untruthful report the identity forbids
    """
    mechanism = mechanism or BalancedTeamMechanism(spec)
    pair = _pair(spec, agents)
    horizon = spec.horizon
    paths = []
    rhs = [Fraction(0), Fraction(0)]
    for path, first, second in _traced_paths(spec, mechanism, profile, pair, max_paths):
        _check_parity(pair, first, second, horizon)
        paths.append(path)
        db, dr = first.delta, second.delta
        rhs[0] += path.probability * sum(
            (-dr[2 * s] * db[2 * s + 1] for s in range(1, (horizon - 2) // 2 + 1)), Fraction(0)
        )
        rhs[1] += path.probability * sum(
            (-db[2 * s - 1] * dr[2 * s] for s in range(1, (horizon - 1) // 2 + 1)), Fraction(0)
        )

    check = LemmaCheck(
        PARITY,
        pair,
        _expected_gamma(spec, paths, pair),
        (coefficient * rhs[0], coefficient * rhs[1]),
        coefficient,
        len(paths),
    )
    _log_check(spec, mechanism, profile, check)
    return check


def _general_rhs(first: DeltaTrace, second: DeltaTrace, horizon: int) -> Fraction:
    """Bracket of the general identity for focal `first` against `second`."""
    df, ds = first.delta, second.delta
    total = Fraction(0)
    for t in range(1, horizon):
        total += (ds[t] - ds[t - 1]) * df[t]
    if horizon >= 1:
        total -= ds[horizon - 1] * df[horizon]
    total += second.true[0] * first.true[0] - second.true[horizon] * first.reported[horizon]
    return total


def _check_final_independence(
    spec: GameSpec,
    pair: Tuple[str, str],
    traced: Sequence[Tuple[PlayPath, DeltaTrace, DeltaTrace]],
) -> None:
    """
    Each agent's final report must be independent of the other's final true
    type given the history before the final round.
    """
    horizon = spec.horizon
    if horizon == 0:
        return
    for focal, other in ((0, 1), (1, 0)):
        groups: Dict[tuple, Dict[Tuple[Fraction, Fraction], Fraction]] = defaultdict(lambda: defaultdict(Fraction))
        for path, *traces in traced:
            history = (path.types[:horizon], path.reports[:horizon], path.actions[: horizon - 1])
            outcome = (traces[focal].reported[horizon], traces[other].true[horizon])
            groups[history][outcome] += path.probability
        for history, joint in groups.items():
            mass = sum(joint.values(), Fraction(0))
            reported_marginal: Dict[Fraction, Fraction] = defaultdict(Fraction)
            true_marginal: Dict[Fraction, Fraction] = defaultdict(Fraction)
            for (reported, true), weight in joint.items():
                reported_marginal[reported] += weight
                true_marginal[true] += weight
            for reported, left in reported_marginal.items():
                for true, right in true_marginal.items():
                    if joint.get((reported, true), Fraction(0)) * mass != left * right:
                        raise HypothesisViolated(
                            f"Final report of {pair[focal]} depends on the final type of {pair[other]} "
                            f"given the history",
                            agent=pair[focal],
                            round=horizon,
                        )


def lemma_general_check(
    spec: GameSpec,
    profile: StrategyProfile,
    coefficient: Fraction,
    mechanism: Optional[Mechanism] = None,
    agents: Optional[Sequence[str]] = None,
    max_paths: int = DEFAULT_MAX_PATHS,
) -> LemmaCheck:
    """
    Compare expected report prices with the general delta closed form.

    Holds for any reporting behavior, also when agents observe each other's
    past types, as long as final reports are conditionally independent of
    the other agent's final type.

    Raises:
        HypothesisViolated: Missing annotations, or a final report that
                            depends on the other agent's final type
    """
    mechanism = mechanism or BalancedTeamMechanism(spec)
    pair = _pair(spec, agents)
    traced = list(_traced_paths(spec, mechanism, profile, pair, max_paths))
    _check_final_independence(spec, pair, traced)

    rhs = [Fraction(0), Fraction(0)]
    for path, first, second in traced:
        rhs[0] += path.probability * _general_rhs(first, second, spec.horizon)
        rhs[1] += path.probability * _general_rhs(second, first, spec.horizon)

    check = LemmaCheck(
        GENERAL,
        pair,
        _expected_gamma(spec, (path for path, _, _ in traced), pair),
        (coefficient * rhs[0], coefficient * rhs[1]),
        coefficient,
        len(traced),
    )
    _log_check(spec, mechanism, profile, check)
    return check


def _log_check(spec: GameSpec, mechanism: Mechanism, profile: StrategyProfile, check: LemmaCheck) -> None:
    log = logger.info if check.holds else logger.warning
    log(
        "lemma_checked",
        scenario=spec.name,
        mechanism=mechanism.name,
        kind=check.kind,
        profile=profile.describe(),
        holds=check.holds,
        lhs=[str(value) for value in check.lhs],
        rhs=[str(value) for value in check.rhs],
    )
