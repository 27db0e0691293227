"""
Guarantee and Martingale Certificates

A truthful agent i facing the sequential-update rule is guaranteed its
trustful value C^i = Υ^i at the initial profile, whatever the others do.
Two certificates back that claim:

- verify_guarantee: the adversarial value of every truthful agent (all
  others jointly minimizing its payoff without seeing its types) is at
  least C^i, and the C^i add up to the efficient total
- verify_martingale: Υ^i plus the transfers and utilities received so far
  has zero conditional drift at every elementary event of play

Residuals are reported as data; only a certificate request for a rule that
claims the guarantee raises on failure.

Tenet #4: Fail Loud, Fail Early
Tenet #10: Observable - every nonzero residual is logged with its event
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import structlog

from src.core.errors import CertificateFailure, HypothesisViolated
from src.core.game_spec import GameSpec
from src.core.types import PUBLIC_AGENT
from src.mechanisms.base import Mechanism, MechanismKind, net_from_payments
from src.mechanisms.sequential_update import SequentialUpdateMechanism
from src.orchestrator.play import PlayState, expected_payoffs, reachable_states, round_branches
from src.policy.efficient_policy import Profile
from src.strategies.base import StrategyProfile

from .best_response import DEFAULT_MAX_NODES, Objective, PlayTree, coalition_value

logger = structlog.get_logger()

GUARANTEE_RULES = (MechanismKind.SEQUENTIAL_UPDATE, MechanismKind.SHAPLEY_AVERAGED)

NATURE_EVENT = "nature"
UPDATE_EVENT = "update"
ACCRUAL_EVENT = "accrual"
ROUND_EVENT = "round"

WITNESS_LIMIT = 5


# ----------------------------------------------------------------------
# Guarantee
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CoalitionBound:
    """Best joint payoff of a coalition against truthful outsiders vs its guarantees."""
    coalition: Tuple[str, ...]
    bound: Fraction
    value: Fraction

    @property
    def holds(self) -> bool:
        return self.value <= self.bound

    def to_dict(self) -> dict:
        return {
            "coalition": list(self.coalition),
            "bound": str(self.bound),
            "value": str(self.value),
            "holds": self.holds,
        }


@dataclass(frozen=True)
class GuaranteeCertificate:
    """
    Per-agent guarantees and adversarial values.

    Attributes:
        agents: Certified agents
        guarantees: C^i per agent
        adversarial: Minimal expected payoff of truthful i over all opponent behavior
        truthful: Expected payoff of i when everybody is truthful
        efficient_total: Expected total utility of truthful play
        guarantee_sum: Sum of C^i over all agents of the game
        notes: Remarks on scope
        coalitions: Optional coalition bounds
    """
    mechanism: str
    agents: Tuple[str, ...]
    guarantees: Tuple[Fraction, ...]
    adversarial: Tuple[Fraction, ...]
    truthful: Tuple[Fraction, ...]
    efficient_total: Fraction
    guarantee_sum: Fraction
    notes: Tuple[str, ...] = ()
    coalitions: Tuple[CoalitionBound, ...] = ()

    @property
    def guarantees_hold(self) -> bool:
        return all(value >= bound for value, bound in zip(self.adversarial, self.guarantees))

    @property
    def total_matches(self) -> bool:
        return self.guarantee_sum == self.efficient_total

    @property
    def is_valid(self) -> bool:
        return self.guarantees_hold and self.total_matches and all(bound.holds for bound in self.coalitions)

    def failing_agents(self) -> List[str]:
        return [
            agent
            for agent, value, bound in zip(self.agents, self.adversarial, self.guarantees)
            if value < bound
        ]

    def to_dict(self) -> dict:
        return {
            "mechanism": self.mechanism,
            "valid": self.is_valid,
            "agents": {
                agent: {
                    "guarantee": str(bound),
                    "adversarial": str(value),
                    "truthful": str(truthful),
                }
                for agent, bound, value, truthful in zip(
                    self.agents, self.guarantees, self.adversarial, self.truthful
                )
            },
            "guarantee_sum": str(self.guarantee_sum),
            "efficient_total": str(self.efficient_total),
            "coalitions": [bound.to_dict() for bound in self.coalitions],
            "notes": list(self.notes),
        }


def _describe_choices(tree: PlayTree) -> List[str]:
    described = []
    for key, labels in tree.chosen_options():
        phase, hidden, reports = key[0], key[1], key[2]
        described.append(f"round {len(hidden) - 1} {phase}: {list(labels)} after reports {list(reports)}")
        if len(described) == WITNESS_LIMIT:
            break
    return described


def verify_guarantee(
    spec: GameSpec,
    mechanism: Mechanism,
    agents: Optional[Sequence[str]] = None,
    coalition_size: int = 0,
    strict: Optional[bool] = None,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> GuaranteeCertificate:
    """
    Certify the guaranteed payoffs of truthful agents.

    Args:
        spec: Validated game
        mechanism: Transfer rule
        agents: Agents to certify (all by default)
        coalition_size: Also bound every coalition of this size (0 skips)
        strict: Raise on failure; defaults to True for the rules that claim
                the guarantee (sequential update, Shapley averaging)

    Raises:
        CertificateFailure: Strict mode and an agent's adversarial value is
                            below its guarantee, or the guarantees do not
                            add up to the efficient total

    Example:
        certificate = verify_guarantee(spec, SequentialUpdateMechanism(spec))
        certificate.guarantees  # C^i per agent
    """
    agents = tuple(agents) if agents is not None else tuple(spec.agents)
    claimed = mechanism.kind in GUARANTEE_RULES
    strict = claimed if strict is None else strict
    truthful_profile = StrategyProfile(spec)

    initial = mechanism.table.initial_value()
    truthful_payoffs = expected_payoffs(spec, mechanism, truthful_profile)
    efficient_total = sum(truthful_payoffs.utility, Fraction(0))

    guarantees = []
    adversarial = []
    witnesses: Dict[str, List[str]] = {}
    for agent in agents:
        bound = initial[spec.agent_position(agent)]
        tree = PlayTree(
            spec,
            mechanism,
            truthful_profile,
            choosers=tuple(other for other in spec.agents if other != agent),
            measured=(agent,),
            objective=Objective.MIN,
            target=agent,
            max_nodes=max_nodes,
        )
        value = tree.solve().value
        guarantees.append(bound)
        adversarial.append(value)
        if value < bound:
            witnesses[agent] = _describe_choices(tree)

    coalitions = ()
    if coalition_size:
        coalitions = tuple(
            CoalitionBound(
                coalition,
                sum((initial[spec.agent_position(member)] for member in coalition), Fraction(0)),
                coalition_value(spec, mechanism, coalition, truthful_profile, max_nodes),
            )
            for coalition in combinations(spec.agents, coalition_size)
        )

    notes = []
    if not claimed:
        notes.append(f"the {mechanism.kind.value} rule does not claim the guarantee; values are informational")

    certificate = GuaranteeCertificate(
        mechanism=mechanism.name,
        agents=agents,
        guarantees=tuple(guarantees),
        adversarial=tuple(adversarial),
        truthful=tuple(truthful_payoffs.of(agent) for agent in agents),
        efficient_total=efficient_total,
        guarantee_sum=sum(initial, Fraction(0)),
        notes=tuple(notes),
        coalitions=coalitions,
    )
    logger.info(
        "certificate_computed",
        scenario=spec.name,
        mechanism=mechanism.name,
        guarantees={agent: str(bound) for agent, bound in zip(agents, guarantees)},
        adversarial={agent: str(value) for agent, value in zip(agents, adversarial)},
        efficient_total=str(efficient_total),
        valid=certificate.is_valid,
    )
    if not strict or certificate.is_valid:
        return certificate

    if witnesses:
        agent = next(iter(witnesses))
        position = agents.index(agent)
        logger.error(
            "certificate_failed",
            scenario=spec.name,
            mechanism=mechanism.name,
            agent=agent,
            guarantee=str(guarantees[position]),
            adversarial=str(adversarial[position]),
        )
        raise CertificateFailure(
            f"Truthful {agent} can be held to {adversarial[position]} "
            f"below its guarantee {guarantees[position]} under {mechanism.name}",
            agent=agent,
            mechanism=mechanism.name,
            witness=witnesses[agent],
        )
    failing = [list(bound.coalition) for bound in coalitions if not bound.holds]
    logger.error(
        "certificate_failed",
        scenario=spec.name,
        mechanism=mechanism.name,
        guarantee_sum=str(certificate.guarantee_sum),
        efficient_total=str(efficient_total),
        coalitions=failing,
    )
    raise CertificateFailure(
        f"Guarantees of {mechanism.name} fail: sum {certificate.guarantee_sum} "
        f"vs efficient total {efficient_total}, failing coalitions {failing}",
        mechanism=mechanism.name,
        coalitions=failing,
    )


# ----------------------------------------------------------------------
# Martingale
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class MartingaleResidual:
    """
    Conditional drift of Υ^i + transfers + utilities at one event.

    Attributes:
        round: Round t of the event
        event: "nature" (public draw), "update" (one report priced),
               "accrual" (utilities of the round) or "round" (whole round)
        agent: Updated agent for "update" events
        residual: Expected change of the process (zero for a martingale)
        reports: Round t-1 reported profile the event starts from
    """
    round: int
    event: str
    agent: Optional[str]
    residual: Fraction
    reports: Profile = ()

    def to_dict(self) -> dict:
        return {
            "round": self.round,
            "event": self.event,
            "agent": self.agent,
            "residual": str(self.residual),
            "reports": list(self.reports),
        }


@dataclass(frozen=True)
class MartingaleReport:
    """
    Residuals of one agent's value process.

    `informational` marks rules for which zero drift is not claimed; their
    residuals are reported at round granularity only.
    """
    agent: str
    mechanism: str
    events: int
    residuals: Tuple[MartingaleResidual, ...] = field(default_factory=tuple)
    informational: bool = False

    @property
    def is_martingale(self) -> bool:
        return not self.residuals

    def located(self) -> List[Tuple[int, str, Optional[str]]]:
        """(round, event, agent) of every nonzero residual, deduplicated."""
        return list(dict.fromkeys((r.round, r.event, r.agent) for r in self.residuals))

    def to_dict(self) -> dict:
        return {
            "agent": self.agent,
            "mechanism": self.mechanism,
            "events": self.events,
            "martingale": self.is_martingale,
            "informational": self.informational,
            "residuals": [residual.to_dict() for residual in self.residuals],
        }


class _ResidualCollector:
    """Deduplicates events by key and keeps nonzero residuals."""

    def __init__(self, spec: GameSpec, mechanism: Mechanism, agent: str):
        self.spec = spec
        self.mechanism = mechanism
        self.agent = agent
        self.seen = set()
        self.residuals: List[MartingaleResidual] = []

    def record(self, key: tuple, compute) -> None:
        if key in self.seen:
            return
        self.seen.add(key)
        residual: MartingaleResidual = compute()
        if residual.residual != 0:
            logger.warning(
                "martingale_residual",
                scenario=self.spec.name,
                mechanism=self.mechanism.name,
                target=self.agent,
                **{("residual_event" if k == "event" else k): v for k, v in residual.to_dict().items()},
            )
            self.residuals.append(residual)


def _value_of(
    mechanism: Mechanism, agent: str, round_index: int, previous: Profile, updated: Mapping[str, str]
) -> Fraction:
    vector = mechanism.table.stage_value(round_index, previous, dict(updated))
    return vector[mechanism.spec.agent_position(agent)]


def _step_net(
    mechanism: SequentialUpdateMechanism,
    agent: str,
    round_index: int,
    previous: Profile,
    before: Mapping[str, str],
    updater: str,
    label: str,
) -> Fraction:
    """Net payment to `agent` caused by `updater` reporting `label`."""
    payments = mechanism.step_payments_for(round_index, previous, before, updater, label)
    return net_from_payments(mechanism.spec.agents, payments)[mechanism.spec.agent_position(agent)]


def _stage_residuals(
    collector: _ResidualCollector,
    mechanism: SequentialUpdateMechanism,
    state: PlayState,
    completed: PlayState,
) -> None:
    """Residuals of every event of one round of `completed` (which extends `state`)."""
    spec, agent = collector.spec, collector.agent
    round_index = completed.round
    previous = state.reports[-1]
    current = completed.reports[-1]
    position = spec.agent_position(agent)

    def nature() -> MartingaleResidual:
        draws = spec.successor_distribution(
            PUBLIC_AGENT, round_index, previous[0], previous[0], mechanism.policy.previous_action(round_index, previous)
        )
        expected = draws.expectation(
            lambda label: _value_of(mechanism, agent, round_index, previous, {PUBLIC_AGENT: label})
        )
        residual = expected - _value_of(mechanism, agent, round_index, previous, {})
        return MartingaleResidual(round_index, NATURE_EVENT, PUBLIC_AGENT, residual, previous)

    collector.record((round_index, NATURE_EVENT, previous), nature)

    before: Dict[str, str] = {PUBLIC_AGENT: current[0]}
    for updater in mechanism.order:
        label = current[spec.profile_position(updater)]
        frozen_before = dict(before)
        key = (round_index, UPDATE_EVENT, updater, previous, tuple(sorted(frozen_before.items())))
        if updater == agent:
            def own_step(frozen_before=frozen_before) -> MartingaleResidual:
                draws = spec.successor_distribution(
                    agent,
                    round_index,
                    previous[spec.profile_position(agent)],
                    previous[0],
                    mechanism.policy.previous_action(round_index, previous),
                )
                expected = draws.expectation(
                    lambda drawn: _value_of(mechanism, agent, round_index, previous, {**frozen_before, agent: drawn})
                    + _step_net(mechanism, agent, round_index, previous, frozen_before, agent, drawn)
                )
                residual = expected - _value_of(mechanism, agent, round_index, previous, frozen_before)
                return MartingaleResidual(round_index, UPDATE_EVENT, agent, residual, previous)

            collector.record(key, own_step)
        else:
            def other_step(frozen_before=frozen_before, updater=updater, label=label) -> MartingaleResidual:
                after = {**frozen_before, updater: label}
                residual = (
                    _value_of(mechanism, agent, round_index, previous, after)
                    - _value_of(mechanism, agent, round_index, previous, frozen_before)
                    + _step_net(mechanism, agent, round_index, previous, frozen_before, updater, label)
                )
                return MartingaleResidual(round_index, UPDATE_EVENT, updater, residual, previous)

            collector.record(key + (label,), other_step)
        before[updater] = label

    action = completed.actions[-1]
    types = completed.types[-1]

    def accrual() -> MartingaleResidual:
        utility = spec.utility(round_index, action, types)[position]
        following = _value_of(mechanism, agent, round_index + 1, current, {})
        residual = utility + following - mechanism.table.stage_value(
            round_index, previous, {a: current[spec.profile_position(a)] for a in spec.all_agents}
        )[position]
        return MartingaleResidual(round_index, ACCRUAL_EVENT, None, residual, previous)

    collector.record((round_index, ACCRUAL_EVENT, previous, current, action, types), accrual)


def _round_residual(
    collector: _ResidualCollector,
    mechanism: Mechanism,
    state: PlayState,
    branches: Sequence[Tuple[PlayState, Fraction]],
) -> None:
    spec, agent = collector.spec, collector.agent
    position = spec.agent_position(agent)
    round_index = state.round + 1
    previous = state.reports[-1]

    def whole_round() -> MartingaleResidual:
        expected = Fraction(0)
        for completed, probability in branches:
            current = completed.reports[-1]
            transfer = mechanism.transfers(round_index, previous, current).net[position]
            utility = spec.utility(round_index, completed.actions[-1], completed.types[-1])[position]
            following = _value_of(mechanism, agent, round_index + 1, current, {})
            expected += probability * (transfer + utility + following)
        residual = expected - _value_of(mechanism, agent, round_index, previous, {})
        return MartingaleResidual(round_index, ROUND_EVENT, None, residual, previous)

    collector.record((round_index, ROUND_EVENT, state), whole_round)


def verify_martingale(
    spec: GameSpec,
    mechanism: Mechanism,
    agent: str,
    profile: Optional[StrategyProfile] = None,
) -> MartingaleReport:
    """
    Check that Υ^agent + cumulative transfers + realized utilities is a martingale.

    Under the sequential-update rule every event of a round is checked
    separately: the public draw, each report priced in the update order and
    the round's utility accrual. Other rules are checked one whole round at
    a time; the Shapley rule must pass, the rest are informational.

    Args:
        spec: Validated game
        mechanism: Transfer rule
        agent: Agent whose value process is checked; must be truthful in `profile`
        profile: Strategies of everybody (truthful by default)

    Raises:
        HypothesisViolated: If `agent` is not truthful in `profile`
    """
    profile = profile or StrategyProfile(spec)
    spec.agent_position(agent)
    if not profile.for_agent(agent).is_truthful:
        logger.warning("martingale_hypothesis_failed", scenario=spec.name, agent=agent)
        raise HypothesisViolated(
            f"The martingale property needs a truthful {agent}, got {profile.for_agent(agent).name!r}",
            agent=agent,
        )

    collector = _ResidualCollector(spec, mechanism, agent)
    staged = isinstance(mechanism, SequentialUpdateMechanism)
    for state, _ in reachable_states(spec, mechanism.policy, profile):
        if state.round == spec.horizon:
            continue
        branches = list(round_branches(spec, mechanism.policy, profile, state))
        if staged:
            for completed, _ in branches:
                _stage_residuals(collector, mechanism, state, completed)
        else:
            _round_residual(collector, mechanism, state, branches)

    report = MartingaleReport(
        agent=agent,
        mechanism=mechanism.name,
        events=len(collector.seen),
        residuals=tuple(collector.residuals),
        informational=mechanism.kind not in GUARANTEE_RULES,
    )
    logger.info(
        "martingale_checked",
        scenario=spec.name,
        mechanism=mechanism.name,
        agent=agent,
        events=report.events,
        nonzero=len(report.residuals),
    )
    return report
