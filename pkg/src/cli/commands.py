"""
CLI Commands

Each command takes a CommandContext (scenario, run configuration and the
selected profile/mechanism options) and returns a CommandResult with a JSON
payload, a text rendering and, for tabular output, CSV. Commands never
print; the front end chooses the rendering and the exit code.

Every number shown is computed by the same analysis functions the tests
use; rendering only formats exact fractions.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import pandas as pd
import structlog

from src.analysis import (
    DominanceMode,
    EliminationOrder,
    brute_force_payoffs,
    budget_balance_over_paths,
    eliminate_dominated,
    induced_normal_form,
    lemma_general_check,
    lemma_parity_check,
    monte_carlo_payoffs,
    nash_check,
    verify_guarantee,
    verify_martingale,
)
from src.analysis.certificates import GUARANTEE_RULES
from src.core.errors import HypothesisViolated, ValidationError
from src.core.rational import format_rat
from src.mechanisms import Mechanism, MechanismFactory
from src.orchestrator import PayoffMeasure, RunConfig, enumerate_paths, expected_payoffs
from src.policy import compute_efficient_policy
from src.scenarios import Scenario, available_scenarios, export_scenario
from src.strategies import StrategyProfile

logger = structlog.get_logger()

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

CHECKS = ("balance", "martingale", "guarantee", "lemma-parity", "lemma-general", "nash")


@dataclass(frozen=True)
class CommandResult:
    """Output of one command."""
    payload: dict
    text: str
    csv: Optional[str] = None
    exit_code: int = EXIT_OK

    def render(self, output_format: str) -> str:
        if output_format == "json":
            return json.dumps(self.payload, indent=2)
        if output_format == "csv" and self.csv is not None:
            return self.csv
        return self.text


@dataclass(frozen=True)
class CommandContext:
    """
    Everything a command needs besides its own options.

    Attributes:
        scenario: Loaded or built scenario
        config: Limits and output options
        profile_name: Named profile to play (truthful by default)
        measure: Payoff component for tables (scenario default when None)
        restrict: agent -> strategy names overriding the table rows
        agents: Agents a check is restricted to
    """
    scenario: Scenario
    config: RunConfig
    profile_name: str = "truthful"
    measure: Optional[PayoffMeasure] = None
    restrict: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    agents: Optional[Tuple[str, ...]] = None

    @property
    def spec(self):
        return self.scenario.spec

    @property
    def table_measure(self) -> PayoffMeasure:
        return self.measure or self.scenario.measure

    def fmt(self, value: Fraction) -> str:
        return format_rat(value, self.config.decimal)

    def mechanism(self) -> Mechanism:
        """Mechanism named in the configuration, with its own efficient policy."""
        policy = compute_efficient_policy(self.spec, self.config.max_policy_states)
        return MechanismFactory.create(
            self.config.mechanism,
            self.spec,
            policy=policy,
            order=self.config.order,
            max_shapley_agents=self.config.max_shapley_agents,
        )

    def profile(self) -> StrategyProfile:
        return self.scenario.profile(self.profile_name)

    def checked_agents(self) -> Tuple[str, ...]:
        agents = self.agents or tuple(self.spec.agents)
        for agent in agents:
            self.spec.agent_position(agent)
        return agents


def _frame_text(frame: pd.DataFrame, empty: str = "(none)") -> str:
    if frame.empty:
        return empty
    return frame.to_string(index=False)


def _header(context: CommandContext, title: str, mechanism: Optional[Mechanism] = None) -> List[str]:
    lines = [f"{title}: {context.scenario.name}"]
    if mechanism is not None:
        lines.append(f"mechanism: {mechanism.name}")
    return lines


# ----------------------------------------------------------------------
# scenario list | show | export
# ----------------------------------------------------------------------

def cmd_scenario_list() -> CommandResult:
    entries = available_scenarios()
    frame = pd.DataFrame(
        [
            {
                "name": entry.name,
                "summary": entry.summary,
                "parameters": ", ".join(f"{name}={value}" for name, value in entry.defaults().items()),
            }
            for entry in entries
        ],
        columns=["name", "summary", "parameters"],
    )
    return CommandResult(
        payload={"scenarios": [entry.to_dict() for entry in entries]},
        text=_frame_text(frame),
        csv=frame.to_csv(index=False),
    )


def cmd_scenario_show(context: CommandContext) -> CommandResult:
    summary = context.scenario.to_dict()
    lines = [f"scenario: {summary['name']} ({summary['kind']})"]
    if summary["description"]:
        lines.append(summary["description"])
    lines.append(f"agents: {', '.join(summary['agents'])}")
    lines.append(f"horizon: {summary['horizon']}")
    for name, value in summary["parameters"].items():
        lines.append(f"parameter {name} = {value}")
    lines.append(f"mechanism: {summary['mechanism']}, measure: {summary['measure']}")
    if summary["coefficient"] is not None:
        lines.append(f"price coefficient: {summary['coefficient']}")
    if summary["normalization"] is not None:
        lines.append(f"table normalization: {summary['normalization']}")
    for agent, names in summary["strategies"].items():
        lines.append(f"strategies of {agent}: {', '.join(names)}")
    for agent, names in summary["table"].items():
        lines.append(f"table row of {agent}: {', '.join(names)}")
    lines.append(f"profiles: {', '.join(summary['profiles'])}")
    lines += [f"note: {note}" for note in summary["notes"]]
    return CommandResult(payload=summary, text="\n".join(lines))


def cmd_scenario_export(context: CommandContext, output: Optional[str] = None) -> CommandResult:
    text = export_scenario(context.scenario)
    payload = {"scenario": context.scenario.name, "yaml": text}
    if output:
        Path(output).write_text(text, encoding="utf-8")
        logger.info("scenario_exported", scenario=context.scenario.name, path=output)
        payload["path"] = output
        return CommandResult(payload=payload, text=f"wrote {output}")
    return CommandResult(payload=payload, text=text.rstrip("\n"))


# ----------------------------------------------------------------------
# policy dump
# ----------------------------------------------------------------------

def cmd_policy_dump(context: CommandContext, limit: Optional[int] = None) -> CommandResult:
    policy = compute_efficient_policy(context.spec, context.config.max_policy_states)
    entries = policy.expand_all()
    shown = entries if limit is None else entries[:limit]
    agents = tuple(context.spec.agents)
    frame = pd.DataFrame(
        [
            {
                "round": entry.round,
                "reports": " ".join(entry.profile),
                "decision": entry.action.label(),
                **{f"value:{agent}": context.fmt(value) for agent, value in zip(agents, entry.values)},
            }
            for entry in shown
        ]
    )
    text = "\n".join(_header(context, "efficient policy") + [_frame_text(frame)])
    if len(shown) < len(entries):
        text += f"\n... {len(entries) - len(shown)} more entries"
    return CommandResult(
        payload={
            "scenario": context.scenario.name,
            "entries": [entry.to_dict(agents) for entry in shown],
            "total_entries": len(entries),
        },
        text=text,
        csv=frame.to_csv(index=False),
    )


# ----------------------------------------------------------------------
# table | eliminate
# ----------------------------------------------------------------------

def _normal_form(context: CommandContext, mechanism: Mechanism):
    sets = context.scenario.table_sets(context.restrict)
    return induced_normal_form(
        context.spec,
        mechanism,
        sets,
        measure=context.table_measure,
        base=context.profile(),
        normalization=context.config.normalization,
        max_paths=context.config.max_paths,
    )


def cmd_table(context: CommandContext) -> CommandResult:
    mechanism = context.mechanism()
    normal_form = _normal_form(context, mechanism)
    equilibria = normal_form.pure_nash()
    lines = _header(context, "table", mechanism)
    lines.append(normal_form.render(context.config.decimal))
    lines.append(
        "pure equilibria: " + ("; ".join(" x ".join(cell) for cell in equilibria) if equilibria else "none")
    )
    lines += [f"note: {note}" for note in context.scenario.notes]
    payload = {
        "scenario": context.scenario.name,
        "mechanism": mechanism.name,
        "measure": normal_form.measure.value,
        "normalization": None if normal_form.normalization is None else format_rat(normal_form.normalization),
        "agents": list(normal_form.agents),
        "strategies": {a: list(s) for a, s in zip(normal_form.agents, normal_form.strategies)},
        "cells": normal_form.to_records(context.config.decimal, normalized=True),
        "pure_nash": [list(cell) for cell in equilibria],
        "notes": list(context.scenario.notes),
    }
    logger.info("table_rendered", scenario=context.scenario.name, cells=len(payload["cells"]))
    return CommandResult(payload=payload, text="\n".join(lines), csv=normal_form.to_csv())


def cmd_eliminate(
    context: CommandContext,
    mode: DominanceMode = DominanceMode.WEAK,
    order: EliminationOrder = EliminationOrder.ROUND_ROBIN,
) -> CommandResult:
    mechanism = context.mechanism()
    normal_form = _normal_form(context, mechanism)
    reduced, trace = eliminate_dominated(normal_form, mode, order)
    replayed = trace.replay(normal_form)
    lines = _header(context, f"{mode.value} elimination ({order.value})", mechanism)
    if not trace.steps:
        lines.append("no strategy is eliminated")
    for step in trace.steps:
        lines.append(f"stage {step.stage}: {step.agent} drops {step.eliminated} (dominated by {step.dominator})")
    for agent, names in zip(reduced.agents, reduced.strategies):
        lines.append(f"surviving for {agent}: {', '.join(names)}")
    if not replayed:
        lines.append("trace replay FAILED")
    frame = pd.DataFrame([step.to_dict() for step in trace.steps], columns=["stage", "agent", "eliminated", "dominator", "mode"])
    payload = {
        "scenario": context.scenario.name,
        "mechanism": mechanism.name,
        "trace": trace.to_dict(),
        "survivors": {agent: list(names) for agent, names in zip(reduced.agents, reduced.strategies)},
        "replayed": replayed,
    }
    return CommandResult(
        payload=payload,
        text="\n".join(lines),
        csv=frame.to_csv(index=False),
        exit_code=EXIT_OK if replayed else EXIT_FAILED,
    )


# ----------------------------------------------------------------------
# verify <check>
# ----------------------------------------------------------------------

def _verdict(context: CommandContext, check: str, mechanism: Mechanism, passed: bool, details, lines) -> CommandResult:
    status = "PASS" if passed else "FAIL"
    text = "\n".join(_header(context, f"verify {check}", mechanism) + lines + [f"result: {status}"])
    payload = {
        "check": check,
        "scenario": context.scenario.name,
        "mechanism": mechanism.name,
        "profile": context.profile_name,
        "passed": passed,
        "details": details,
    }
    logger.info("verification_finished", check=check, scenario=context.scenario.name, passed=passed)
    return CommandResult(payload=payload, text=text, exit_code=EXIT_OK if passed else EXIT_FAILED)


def _verify_balance(context: CommandContext, mechanism: Mechanism) -> CommandResult:
    verdict = budget_balance_over_paths(context.spec, mechanism, context.profile(), context.config.max_paths)
    lines = [f"ledgers checked: {verdict.ledgers}"]
    if verdict.warning:
        lines.append(f"warning: external subsidy up to {context.fmt(verdict.subsidy)}")
        if verdict.expected_subsidy is not None:
            lines.append(f"expected subsidy: {context.fmt(verdict.expected_subsidy)}")
    for round_index, amount in verdict.violations[:10]:
        lines.append(f"round {round_index}: transfers sum to {context.fmt(amount)}")
    return _verdict(context, "balance", mechanism, verdict.passed, verdict.to_dict(), lines)


def _verify_martingale(context: CommandContext, mechanism: Mechanism) -> CommandResult:
    profile = context.profile()
    if context.agents:
        agents = context.checked_agents()
    else:
        agents = tuple(agent for agent in context.spec.agents if profile.for_agent(agent).is_truthful)
    if not agents:
        raise HypothesisViolated(f"Profile {context.profile_name!r} has no truthful agent to check")
    reports = [verify_martingale(context.spec, mechanism, agent, profile) for agent in agents]
    lines = []
    for report in reports:
        label = " (informational)" if report.informational else ""
        if report.is_martingale:
            lines.append(f"{report.agent}: zero residual on {report.events} events{label}")
        else:
            located = ", ".join(f"round {t} {event}" + (f" {agent}" if agent else "") for t, event, agent in report.located()[:5])
            lines.append(f"{report.agent}: {len(report.residuals)} nonzero residuals{label} at {located}")
    passed = all(report.is_martingale or report.informational for report in reports)
    details = {"reports": [report.to_dict() for report in reports]}
    return _verdict(context, "martingale", mechanism, passed, details, lines)


def _verify_guarantee(context: CommandContext, mechanism: Mechanism, coalition_size: int) -> CommandResult:
    if mechanism.kind not in GUARANTEE_RULES:
        raise HypothesisViolated(
            f"Guarantees are certified for {[kind.value for kind in GUARANTEE_RULES]}, not {mechanism.kind.value}"
        )
    certificate = verify_guarantee(
        context.spec, mechanism, agents=context.agents, coalition_size=coalition_size, strict=False
    )
    lines = [
        f"{agent}: C = {context.fmt(bound)}, adversarial = {context.fmt(value)}, truthful = {context.fmt(truthful)}"
        for agent, bound, value, truthful in zip(
            certificate.agents, certificate.guarantees, certificate.adversarial, certificate.truthful
        )
    ]
    lines.append(
        f"sum of guarantees {context.fmt(certificate.guarantee_sum)}, "
        f"efficient total {context.fmt(certificate.efficient_total)}"
    )
    for bound in certificate.coalitions:
        lines.append(
            f"coalition {'+'.join(bound.coalition)}: value {context.fmt(bound.value)} <= {context.fmt(bound.bound)}"
            + ("" if bound.holds else " VIOLATED")
        )
    return _verdict(context, "guarantee", mechanism, certificate.is_valid, certificate.to_dict(), lines)


def _verify_lemma(context: CommandContext, mechanism: Mechanism, check: str) -> CommandResult:
    if context.scenario.coefficient is None:
        raise ValidationError(f"Scenario {context.scenario.name} has no price coefficient")
    run = lemma_parity_check if check == "lemma-parity" else lemma_general_check
    result = run(
        context.spec,
        context.profile(),
        context.scenario.coefficient,
        mechanism=mechanism,
        agents=context.agents,
        max_paths=context.config.max_paths,
    )
    lines = [
        f"{agent}: enumerated {context.fmt(left)}, closed form {context.fmt(right)}"
        for agent, left, right in zip(result.agents, result.lhs, result.rhs)
    ]
    lines.append(f"coefficient {context.fmt(result.coefficient)} over {result.paths} paths")
    return _verdict(context, check, mechanism, result.holds, result.to_dict(), lines)


def _verify_nash(context: CommandContext, mechanism: Mechanism) -> CommandResult:
    verdict = nash_check(
        context.spec,
        mechanism,
        context.profile(),
        sets=context.scenario.sets_by_agent(),
        agents=context.agents,
        max_paths=context.config.max_paths,
    )
    lines = [f"profile: {', '.join(f'{a}={s}' for a, s in verdict.profile)}"]
    lines += [f"{agent}: {context.fmt(verdict.payoffs.of(agent))}" for agent in verdict.payoffs.agents]
    for witness in verdict.witnesses:
        lines.append(f"profitable deviation: {witness.to_dict()}")
    lines.append(f"scope: {', '.join(verdict.scope)}")
    return _verdict(context, "nash", mechanism, verdict.is_nash, verdict.to_dict(), lines)


def cmd_verify(context: CommandContext, check: str, coalition_size: int = 0) -> CommandResult:
    """
    Run one verification.

    Raises:
        ValidationError: Unknown check or missing scenario data
        HypothesisViolated: The check does not apply to this mechanism or profile
    """
    if check not in CHECKS:
        raise ValidationError(f"Unknown check {check!r} (known: {', '.join(CHECKS)})")
    mechanism = context.mechanism()
    if check == "balance":
        return _verify_balance(context, mechanism)
    if check == "martingale":
        return _verify_martingale(context, mechanism)
    if check == "guarantee":
        return _verify_guarantee(context, mechanism, coalition_size)
    if check == "nash":
        return _verify_nash(context, mechanism)
    return _verify_lemma(context, mechanism, check)


# ----------------------------------------------------------------------
# ledger | payoff
# ----------------------------------------------------------------------

def cmd_ledger(context: CommandContext, limit: Optional[int] = None) -> CommandResult:
    mechanism = context.mechanism()
    paths = list(enumerate_paths(context.spec, mechanism, context.profile(), context.config.max_paths))
    shown = paths if limit is None else paths[:limit]
    lines = _header(context, "ledger", mechanism)
    frames = []
    for index, path in enumerate(shown, start=1):
        frame = path.ledger.to_frame(context.config.decimal)
        lines.append(
            f"path {index}: probability {format_rat(path.probability)}, "
            f"reports {' / '.join(' '.join(profile[1:]) for profile in path.reports[1:])}"
        )
        lines.append(_frame_text(frame, empty="(no payments)"))
        totals = ", ".join(f"{a}={context.fmt(v)}" for a, v in zip(path.ledger.agents, path.ledger.totals))
        lines.append(f"net: {totals}" + (f", subsidy {context.fmt(path.ledger.subsidy)}" if path.ledger.subsidy else ""))
        frame.insert(0, "probability", format_rat(path.probability))
        frame.insert(0, "path", index)
        frames.append(frame)
    if len(shown) < len(paths):
        lines.append(f"... {len(paths) - len(shown)} more paths")
    columns = ["path", "probability", "round", "payer", "payee", "amount"]
    table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame(columns=columns)
    payload = {
        "scenario": context.scenario.name,
        "mechanism": mechanism.name,
        "profile": context.profile_name,
        "paths": [{"probability": str(p.probability), "ledger": p.ledger.to_dict()} for p in shown],
        "total_paths": len(paths),
    }
    return CommandResult(payload=payload, text="\n".join(lines), csv=table.to_csv(index=False))


def cmd_payoff(
    context: CommandContext,
    oracle: bool = False,
    samples: Optional[int] = None,
) -> CommandResult:
    """
    Expected payoffs of the selected profile, optionally cross-checked.

    Args:
        oracle: Also sum outcomes by brute-force enumeration
        samples: Also estimate by Monte Carlo with this many samples
                 (seeded from the run configuration)
    """
    mechanism = context.mechanism()
    profile = context.profile()
    payoffs = expected_payoffs(context.spec, mechanism, profile, context.config.max_paths)
    rows = {
        agent: {
            "utility": context.fmt(payoffs.utility[i]),
            "transfer": context.fmt(payoffs.transfer[i]),
            "gamma": context.fmt(payoffs.gamma[i]),
            "total": context.fmt(payoffs.total[i]),
        }
        for i, agent in enumerate(payoffs.agents)
    }
    payload = {
        "scenario": context.scenario.name,
        "mechanism": mechanism.name,
        "profile": context.profile_name,
        "payoffs": payoffs.to_dict(),
    }
    agreed = True
    if oracle:
        reference = brute_force_payoffs(context.spec, mechanism, profile)
        matches = reference.total == payoffs.total and reference.utility == payoffs.utility
        for i, agent in enumerate(payoffs.agents):
            rows[agent]["oracle"] = context.fmt(reference.total[i])
        payload["oracle"] = {"payoffs": reference.to_dict(), "matches": matches}
        agreed = agreed and matches
    if samples is not None:
        estimate = monte_carlo_payoffs(context.spec, mechanism, profile, samples=samples, seed=context.config.seed)
        within = estimate.within(payoffs.total)
        for i, agent in enumerate(payoffs.agents):
            rows[agent]["mc_mean"] = f"{estimate.mean[i]:.6g}"
            rows[agent]["mc_stderr"] = f"{estimate.stderr[i]:.3g}"
        payload["monte_carlo"] = {**estimate.to_dict(), "within_tolerance": within}
        agreed = agreed and within

    frame = pd.DataFrame.from_dict(rows, orient="index")
    frame.index.name = "agent"
    lines = _header(context, "payoff", mechanism) + [f"profile: {profile.describe()}", frame.to_string()]
    lines.append(f"paths: {payoffs.paths}")
    if payoffs.subsidy:
        lines.append(f"expected subsidy: {context.fmt(payoffs.subsidy)}")
    if not agreed:
        lines.append("cross-check FAILED")
    return CommandResult(
        payload=payload,
        text="\n".join(lines),
        csv=frame.reset_index().to_csv(index=False),
        exit_code=EXIT_OK if agreed else EXIT_FAILED,
    )


def parse_assignments(items: Sequence[str], flag: str) -> Dict[str, str]:
    """`name=value` items of a repeatable flag."""
    result: Dict[str, str] = {}
    for item in items:
        name, separator, value = item.partition("=")
        if not separator or not name.strip():
            raise ValidationError(f"{flag} expects NAME=VALUE, got {item!r}")
        result[name.strip()] = value.strip()
    return result


def parse_restriction(items: Sequence[str]) -> Dict[str, Tuple[str, ...]]:
    """`--strategies AGENT=a,b` items; an empty list is kept and rejected later."""
    return {
        agent: tuple(name.strip() for name in value.split(",") if name.strip())
        for agent, value in parse_assignments(items, "--strategies").items()
    }


__all__ = [
    "CHECKS",
    "EXIT_FAILED",
    "EXIT_OK",
    "EXIT_USAGE",
    "CommandContext",
    "CommandResult",
    "cmd_eliminate",
    "cmd_ledger",
    "cmd_payoff",
    "cmd_policy_dump",
    "cmd_scenario_export",
    "cmd_scenario_list",
    "cmd_scenario_show",
    "cmd_table",
    "cmd_verify",
    "parse_assignments",
    "parse_restriction",
]
