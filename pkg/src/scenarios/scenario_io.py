"""
Scenario Files - YAML loading and export

A scenario file is a YAML document validated by ScenarioDocument and then
bound into a GameSpec plus its strategy library. Every failure names the
offending line: YAML syntax errors carry the parser's mark, schema errors
are located by walking the composed node tree, and errors raised while
binding an entry report the line where that entry starts.

export_scenario is the inverse of load_scenario: exporting a scenario and
parsing the result gives an equal GameSpec.

Usage:
    scenario = load_scenario("config/scenarios/example1_k2.yaml")
    text = export_scenario(build_appendix_a(3))

Tenet #4: Fail Loud, Fail Early
"""

from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

import pydantic
import structlog
import yaml

from src.core.errors import ParseError, ValidationError
from src.core.game_spec import DecisionSpace, GameSpec, KernelRow, UtilityRule, validate
from src.core.rational import format_rat, parse_rat
from src.core.types import NO_DECISION, WILDCARD, AgentType, Distribution
from src.mechanisms.factory import MechanismFactory
from src.orchestrator.outcome import PayoffMeasure
from src.strategies.base import Strategy, StrategySet, TruthfulStrategy
from src.strategies.scripted import ScriptedStrategy, compile_script

from .scenario import Scenario, ScenarioKind
from .schema import ScenarioDocument

logger = structlog.get_logger()

Location = Tuple[Optional[int], Optional[int]]


# ----------------------------------------------------------------------
# Locating errors
# ----------------------------------------------------------------------

def _locate(root: Optional[yaml.Node], path: Sequence[Union[str, int]]) -> Location:
    """1-based (line, column) of the deepest node on `path` that exists."""
    node = root
    if node is None:
        return None, None
    for part in path:
        child = None
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                if key.value == str(part):
                    child = value
                    break
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int) and 0 <= part < len(node.value):
            child = node.value[part]
        if child is None:
            break
        node = child
    return node.start_mark.line + 1, node.start_mark.column + 1


@contextmanager
def _located(root: Optional[yaml.Node], path: Sequence[Union[str, int]], origin: str) -> Iterator[None]:
    """Re-raise binding errors of one entry with the entry's line."""
    try:
        yield
    except ParseError as error:
        line, _ = _locate(root, path)
        raise ParseError(
            f"{origin}: {'.'.join(map(str, path))}: {error.message}",
            line=line,
            column=error.column,
            origin=origin,
        ) from error
    except ValidationError as error:
        line, column = _locate(root, path)
        context = {**error.context, "origin": origin, "line": line, "column": column}
        raise type(error)(f"{origin}: {'.'.join(map(str, path))}: {error} (line {line})", **context) from error


# ----------------------------------------------------------------------
# Loading
# ----------------------------------------------------------------------

def _read_document(text: str, origin: str) -> Tuple[ScenarioDocument, yaml.Node]:
    try:
        raw = yaml.safe_load(text)
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as error:
        mark = error.problem_mark or error.context_mark
        raise ParseError(
            f"{origin}: invalid YAML: {error.problem or error.context}",
            line=mark.line + 1 if mark else None,
            column=mark.column + 1 if mark else None,
            origin=origin,
        ) from error
    except yaml.YAMLError as error:
        raise ParseError(f"{origin}: invalid YAML: {error}", origin=origin) from error

    if not isinstance(raw, dict):
        raise ParseError(f"{origin}: a scenario document must be a mapping", line=1, column=1, origin=origin)

    try:
        return ScenarioDocument.model_validate(raw), root
    except pydantic.ValidationError as error:
        first = error.errors()[0]
        path = [part for part in first["loc"] if isinstance(part, (str, int))]
        line, column = _locate(root, path)
        logger.warning("scenario_schema_failed", origin=origin, errors=error.error_count(), line=line)
        raise ParseError(
            f"{origin}: {'.'.join(map(str, path)) or 'document'}: {first['msg']}",
            line=line,
            column=column,
            origin=origin,
            errors=error.error_count(),
        ) from error


def _spec_from_document(document: ScenarioDocument, root: yaml.Node, origin: str) -> GameSpec:
    types: List[AgentType] = []
    for index, entry in enumerate(document.types):
        with _located(root, ("types", index), origin):
            annotations = {label: parse_rat(value) for label, value in entry.annotations.items()}
            types += [AgentType(entry.agent, entry.round, label, annotations.get(label)) for label in entry.labels]

    kernel: List[KernelRow] = []
    for index, entry in enumerate(document.kernel):
        with _located(root, ("kernel", index), origin):
            outcomes = Distribution(tuple((label, parse_rat(weight)) for label, weight in entry.outcomes.items()))
            kernel.append(
                KernelRow(
                    entry.agent,
                    outcomes,
                    round=entry.round,
                    source=entry.source,
                    public_type=entry.public_type,
                    public_decision=entry.public_decision,
                    private_decision=entry.private_decision,
                )
            )

    decisions = tuple(
        DecisionSpace(
            entry.round,
            tuple(entry.public),
            tuple((agent, tuple(options)) for agent, options in entry.private.items()),
        )
        for entry in document.decisions
    )

    utilities: List[UtilityRule] = []
    for index, entry in enumerate(document.utilities):
        with _located(root, ("utilities", index), origin):
            utilities.append(
                UtilityRule(
                    entry.agent,
                    parse_rat(entry.value),
                    round=entry.round,
                    public_decision=entry.public_decision,
                    private_decisions=tuple(entry.private_decisions.items()),
                    types=tuple(entry.types.items()),
                )
            )

    return validate(
        GameSpec(
            name=document.name,
            horizon=document.horizon,
            agents=tuple(document.agents),
            types=tuple(types),
            kernel=tuple(kernel),
            decisions=decisions,
            utilities=tuple(utilities),
            revelations=tuple(tuple(pair) for pair in document.revelations),
            description=document.description,
        )
    )


def _library(spec: GameSpec, document: ScenarioDocument, root: yaml.Node, origin: str) -> Tuple[StrategySet, ...]:
    by_agent: Dict[str, List[Strategy]] = {}
    for index, entry in enumerate(document.strategies):
        with _located(root, ("strategies", index), origin):
            spec.agent_position(entry.agent)
            if entry.script is None:
                strategy: Strategy = TruthfulStrategy(entry.agent, entry.name)
            else:
                strategy = compile_script(spec, entry.agent, entry.script, entry.name)
            by_agent.setdefault(entry.agent, []).append(strategy)
    return tuple(StrategySet(agent, tuple(strategies)) for agent, strategies in by_agent.items())


def parse_scenario(text: str, origin: str = "<string>") -> Scenario:
    """
    Parse a scenario document.

    Raises:
        ParseError: YAML syntax or schema violations, with line and column
        ValidationError: The described game violates a model invariant
    """
    document, root = _read_document(text, origin)
    spec = _spec_from_document(document, root, origin)
    library = _library(spec, document, root, origin)

    with _located(root, ("analysis",), origin):
        mechanism = MechanismFactory.parse_kind(document.analysis.mechanism)
        try:
            measure = PayoffMeasure(document.analysis.measure)
        except ValueError:
            raise ValidationError(f"Unknown payoff measure {document.analysis.measure!r}") from None
        coefficient = None if document.analysis.coefficient is None else parse_rat(document.analysis.coefficient)
        normalization = None if document.analysis.normalization is None else parse_rat(document.analysis.normalization)

    with _located(root, ("kind",), origin):
        try:
            kind = ScenarioKind(document.kind)
        except ValueError:
            raise ValidationError(f"Unknown scenario kind {document.kind!r}") from None

    with _located(root, ("profiles",), origin):
        return Scenario(
            spec=spec,
            kind=kind,
            parameters=tuple(document.parameters.items()),
            library=library,
            table=tuple((agent, tuple(names)) for agent, names in document.table.items()),
            profiles=tuple((name, tuple(assignment.items())) for name, assignment in document.profiles.items()),
            coefficient=coefficient,
            normalization=normalization,
            measure=measure,
            mechanism=mechanism,
            notes=tuple(document.notes),
        )


def load_scenario(path: Union[str, Path]) -> Scenario:
    """
    Load a scenario file.

    Raises:
        FileNotFoundError: If the file does not exist
        ParseError / ValidationError: As parse_scenario
    """
    scenario_file = Path(path)
    if not scenario_file.exists():
        raise FileNotFoundError(f"Scenario file not found: {path}")
    scenario = parse_scenario(scenario_file.read_text(encoding="utf-8"), origin=str(scenario_file))
    logger.info("scenario_loaded", path=str(scenario_file), agents=len(scenario.spec.agents))
    return scenario


# ----------------------------------------------------------------------
# Export
# ----------------------------------------------------------------------

def _type_entries(spec: GameSpec) -> List[dict]:
    entries: List[dict] = []
    for agent_type in spec.types:
        if not entries or (entries[-1]["agent"], entries[-1]["round"]) != (agent_type.agent, agent_type.round):
            entries.append({"agent": agent_type.agent, "round": agent_type.round, "labels": []})
        entry = entries[-1]
        entry["labels"].append(agent_type.label)
        if agent_type.annotation is not None:
            entry.setdefault("annotations", {})[agent_type.label] = format_rat(agent_type.annotation)
    return entries


def _kernel_entry(row: KernelRow) -> dict:
    entry: dict = {"agent": row.agent}
    if row.round is not None:
        entry["round"] = row.round
    for name in ("source", "public_type", "public_decision", "private_decision"):
        if getattr(row, name) != WILDCARD:
            entry[name] = getattr(row, name)
    entry["outcomes"] = {label: format_rat(weight) for label, weight in row.outcomes.weights}
    return entry


def _utility_entry(rule: UtilityRule) -> dict:
    entry: dict = {"agent": rule.agent, "value": format_rat(rule.value)}
    if rule.round is not None:
        entry["round"] = rule.round
    if rule.public_decision != WILDCARD:
        entry["public_decision"] = rule.public_decision
    if rule.private_decisions:
        entry["private_decisions"] = dict(rule.private_decisions)
    if rule.types:
        entry["types"] = dict(rule.types)
    return entry


def _decision_entry(space: DecisionSpace) -> dict:
    entry: dict = {"round": space.round}
    if space.public != (NO_DECISION,):
        entry["public"] = list(space.public)
    if space.private:
        entry["private"] = {agent: list(options) for agent, options in space.private}
    return entry


def _strategy_entry(strategy: Strategy) -> dict:
    entry = {"agent": strategy.agent, "name": strategy.name}
    if isinstance(strategy, ScriptedStrategy):
        entry["script"] = strategy.text
    elif not strategy.is_truthful:
        raise ValidationError(
            f"Strategy {strategy.name!r} of {strategy.agent} has no script form", strategy=strategy.name
        )
    return entry


def export_scenario(scenario: Scenario) -> str:
    """YAML text of a scenario; parse_scenario reads it back."""
    spec = scenario.spec
    document: dict = {
        "name": spec.name,
        "description": spec.description,
        "kind": scenario.kind.value,
        "horizon": spec.horizon,
        "agents": list(spec.agents),
    }
    if scenario.parameters:
        document["parameters"] = dict(scenario.parameters)
    document["types"] = _type_entries(spec)
    document["kernel"] = [_kernel_entry(row) for row in spec.kernel]
    document["decisions"] = [_decision_entry(space) for space in spec.decisions]
    document["utilities"] = [_utility_entry(rule) for rule in spec.utilities]
    if spec.revelations:
        document["revelations"] = [list(pair) for pair in spec.revelations]
    document["strategies"] = [
        _strategy_entry(strategy) for strategy_set in scenario.library for strategy in strategy_set.strategies
    ]
    document["table"] = {agent: list(names) for agent, names in scenario.table}
    document["profiles"] = {name: dict(assignment) for name, assignment in scenario.profiles}
    analysis = {"mechanism": scenario.mechanism.value, "measure": scenario.measure.value}
    if scenario.coefficient is not None:
        analysis["coefficient"] = format_rat(scenario.coefficient)
    if scenario.normalization is not None:
        analysis["normalization"] = format_rat(scenario.normalization)
    document["analysis"] = analysis
    if scenario.notes:
        document["notes"] = list(scenario.notes)
    return yaml.safe_dump(document, sort_keys=False, allow_unicode=True, width=120)


def save_scenario(scenario: Scenario, path: Union[str, Path]) -> Path:
    """Write export_scenario(scenario) to `path`."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(export_scenario(scenario), encoding="utf-8")
    logger.info("scenario_saved", path=str(target), scenario=scenario.name)
    return target
