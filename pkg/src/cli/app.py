"""
Tally command-line front end

Subcommands:
    scenario list|show|export   Registered scenarios and scenario files
    policy dump                 Efficient decision policy per reported profile
    table                       Induced normal form of the scenario's table sets
    eliminate                   Iterated elimination of dominated strategies
    verify <check>              balance, martingale, guarantee, lemma-parity,
                                lemma-general or nash
    ledger                      Transfers along every path of play
    payoff                      Expected payoffs, optionally cross-checked

Exit codes: 0 pass, 1 verification failure, 2 usage or configuration error.
Results go to stdout; structured logs go to stderr.

Usage:
    python -m src.cli table --scenario appendixA --normalize 1/3
    python -m src.cli verify guarantee --scenario example1 --K 3 --mechanism sequential
"""

import argparse
import sys
from typing import Dict, List, Optional, Sequence

import structlog

from src.analysis import DominanceMode, EliminationOrder
from src.core.errors import (
    CertificateFailure,
    HypothesisViolated,
    ParseError,
    ResourceLimitExceeded,
    UnreachableObservation,
    ValidationError,
)
from src.core.rational import parse_rat
from src.mechanisms import MechanismKind
from src.orchestrator import PayoffMeasure, RunConfig
from src.orchestrator.run_config import OUTPUT_FORMATS
from src.scenarios import Scenario, load_scenario, scenario_entry
from src.utils.logging_config import configure_logging

from .commands import (
    CHECKS,
    EXIT_FAILED,
    EXIT_USAGE,
    CommandContext,
    CommandResult,
    cmd_eliminate,
    cmd_ledger,
    cmd_payoff,
    cmd_policy_dump,
    cmd_scenario_export,
    cmd_scenario_list,
    cmd_scenario_show,
    cmd_table,
    cmd_verify,
    parse_assignments,
    parse_restriction,
)

logger = structlog.get_logger()

USAGE_ERRORS = (
    ValidationError,
    ParseError,
    HypothesisViolated,
    ResourceLimitExceeded,
    UnreachableObservation,
    FileNotFoundError,
    ValueError,
)


class UsageError(Exception):
    """Flag combination the parser cannot reject on its own."""


def _source_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    source = parent.add_argument_group("scenario")
    source.add_argument("--scenario", help="Registered scenario name (see `scenario list`)")
    source.add_argument("--file", help="Scenario file (YAML)")
    source.add_argument("--K", dest="rounds", help="Number of rounds for scenarios that take one")
    source.add_argument("--n", dest="agent_count", help="Number of agents for scenarios that take one")
    source.add_argument("--param", action="append", default=[], metavar="NAME=VALUE", help="Scenario parameter")

    play = parent.add_argument_group("play")
    play.add_argument("--mechanism", choices=[kind.value for kind in MechanismKind], help="Transfer rule")
    play.add_argument("--order", help="Comma-separated update order for the sequential rule")
    play.add_argument("--profile", default="truthful", help="Named strategy profile (default: truthful)")
    play.add_argument("--agent", action="append", default=[], help="Restrict a check to this agent")
    play.add_argument(
        "--strategies", action="append", default=[], metavar="AGENT=a,b", help="Strategy names of a table row"
    )
    play.add_argument("--measure", choices=[measure.value for measure in PayoffMeasure], help="Payoff component")

    limits = parent.add_argument_group("limits")
    limits.add_argument("--max-paths", type=int, help="Cap on enumerated paths")
    limits.add_argument("--max-policy-states", type=int, help="Cap on policy states")
    limits.add_argument("--seed", type=int, help="Sampling seed (required with --monte-carlo)")
    limits.add_argument("--samples", type=int, help="Monte Carlo sample count")

    output = parent.add_argument_group("output")
    output.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS, default="text")
    output.add_argument("--normalize", help="Display factor for tables, or `none`")
    output.add_argument("--decimal", type=int, help="Show k decimal places instead of exact fractions")
    output.add_argument("--log-level", help="DEBUG, INFO, WARNING or ERROR")
    output.add_argument("--json-logs", action="store_true", help="Log JSON lines to stderr")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parent = _source_options()
    parser = argparse.ArgumentParser(prog="tally", description="Exact analysis of dynamic reporting games")
    commands = parser.add_subparsers(dest="command", required=True)

    scenario = commands.add_parser("scenario", parents=[parent], help="List, show or export scenarios")
    scenario.add_argument("action", choices=("list", "show", "export"))
    scenario.add_argument("--output", help="Write the exported YAML here")

    policy = commands.add_parser("policy", parents=[parent], help="Efficient decision policy")
    policy.add_argument("action", choices=("dump",))
    policy.add_argument("--limit", type=int, help="Show at most this many entries")

    commands.add_parser("table", parents=[parent], help="Induced normal form")

    eliminate = commands.add_parser("eliminate", parents=[parent], help="Iterated dominance elimination")
    eliminate.add_argument("--mode", choices=[mode.value for mode in DominanceMode], default="weak")
    eliminate.add_argument(
        "--elimination", choices=[order.value for order in EliminationOrder], default="round-robin"
    )

    verify = commands.add_parser("verify", parents=[parent], help="Run a verification")
    verify.add_argument("check", choices=CHECKS)
    verify.add_argument("--coalition", type=int, default=0, help="Also bound coalitions up to this size")

    ledger = commands.add_parser("ledger", parents=[parent], help="Transfers along every path")
    ledger.add_argument("--limit", type=int, help="Show at most this many paths")

    payoff = commands.add_parser("payoff", parents=[parent], help="Expected payoffs")
    payoff.add_argument("--oracle", action="store_true", help="Cross-check by brute-force enumeration")
    payoff.add_argument("--monte-carlo", action="store_true", help="Cross-check by seeded sampling")
    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, str]:
    overrides = parse_assignments(args.param, "--param")
    if args.scenario is None:
        return overrides
    entry = scenario_entry(args.scenario)
    names = {parameter.name for parameter in entry.parameters}
    if args.rounds is not None:
        overrides["K" if "K" in names or "k" not in names else "k"] = args.rounds
    if args.agent_count is not None:
        overrides["n" if "n" in names or "agents" not in names else "agents"] = args.agent_count
    if args.seed is not None and "seed" in names and "seed" not in overrides:
        overrides["seed"] = str(args.seed)
    return overrides


def load_source(args: argparse.Namespace) -> Scenario:
    """The scenario named by exactly one of --scenario and --file."""
    if (args.scenario is None) == (args.file is None):
        raise UsageError("Give exactly one of --scenario and --file")
    if args.file is not None:
        if args.param or args.rounds is not None or args.agent_count is not None:
            raise UsageError("Scenario parameters only apply to registered scenarios")
        return load_scenario(args.file)
    return scenario_entry(args.scenario).build(_overrides(args))


def _normalization(args: argparse.Namespace, scenario: Scenario):
    if args.normalize is None:
        return scenario.normalization
    if args.normalize.strip().lower() in ("none", "off"):
        return None
    return parse_rat(args.normalize)


def build_config(args: argparse.Namespace, scenario: Optional[Scenario]) -> RunConfig:
    order = tuple(name.strip() for name in args.order.split(",")) if args.order else None
    mechanism = args.mechanism or (scenario.mechanism.value if scenario is not None else None)
    return RunConfig.from_env(
        max_paths=args.max_paths,
        max_policy_states=args.max_policy_states,
        samples=args.samples,
        seed=args.seed,
        mechanism=mechanism,
        order=order,
        normalization=_normalization(args, scenario) if scenario is not None else None,
        output_format=args.output_format,
        decimal=args.decimal,
        log_level=args.log_level.upper() if args.log_level else None,
    )


def build_context(args: argparse.Namespace, scenario: Scenario, config: RunConfig) -> CommandContext:
    return CommandContext(
        scenario=scenario,
        config=config,
        profile_name=args.profile,
        measure=PayoffMeasure(args.measure) if args.measure else None,
        restrict=parse_restriction(args.strategies),
        agents=tuple(args.agent) or None,
    )


def dispatch(args: argparse.Namespace, context: CommandContext) -> CommandResult:
    if args.command == "scenario":
        if args.action == "show":
            return cmd_scenario_show(context)
        return cmd_scenario_export(context, args.output)
    if args.command == "policy":
        return cmd_policy_dump(context, args.limit)
    if args.command == "table":
        return cmd_table(context)
    if args.command == "eliminate":
        return cmd_eliminate(context, DominanceMode(args.mode), EliminationOrder(args.elimination))
    if args.command == "verify":
        return cmd_verify(context, args.check, args.coalition)
    if args.command == "ledger":
        return cmd_ledger(context, args.limit)
    if args.monte_carlo and args.seed is None:
        raise UsageError("--monte-carlo requires --seed")
    samples = context.config.samples if args.monte_carlo else None
    return cmd_payoff(context, oracle=args.oracle, samples=samples)


def run(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse arguments, run one command and print its result.

    Returns:
        Process exit code
    """
    args = build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level or "WARNING", json_output=args.json_logs)
        if args.command == "scenario" and args.action == "list":
            result = cmd_scenario_list()
            print(result.render(args.output_format))
            return result.exit_code
        scenario = load_source(args)
        config = build_config(args, scenario)
        configure_logging(config.log_level, json_output=args.json_logs)
        logger.info("command_started", command=args.command, scenario=scenario.name, config=config.to_dict())
        result = dispatch(args, build_context(args, scenario, config))
    except CertificateFailure as error:
        logger.error("certificate_failed", error=str(error))
        print(f"verification failed: {error}", file=sys.stderr)
        return EXIT_FAILED
    except (UsageError, *USAGE_ERRORS) as error:
        logger.error("command_rejected", command=args.command, error=str(error))
        print(f"error: {error}", file=sys.stderr)
        return EXIT_USAGE

    print(result.render(config.output_format))
    logger.info("command_finished", command=args.command, exit_code=result.exit_code)
    return result.exit_code


def main(argv: Optional[List[str]] = None) -> None:
    """Main entry point."""
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
