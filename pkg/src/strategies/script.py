"""
Strategy script language - tokenizer, syntax tree and parser

A script is a list of rules separated by ";":

    round 2 => if report[red@1] == r1:0% then b2:100% else truth;
    default => truth;
    decide * => follow

Expressions:
    if <condition> then <expr> else <expr>
    truth | follow | random <seed> | <label> | {<label> = <weight>, ...}

Conditions:
    <ref> == <label> | <ref> != <label> | p(<ref>) <op> <number>
    combined with and / or / not and parentheses

References:
    report[<agent>@<round>]  public report
    type[<round>]            own true type
    type[<agent>@<round>]    revealed true type of another agent

Parsing is purely syntactic; names and rounds are bound against a game in
`src.strategies.scripted`.
"""

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from src.core.errors import ParseError
from src.core.rational import parse_rat

from .base import ObservationPhase

_TOKEN_PATTERN = re.compile(
    r"(?P<space>\s+)"
    r"|(?P<symbol>=>|==|!=|<=|>=|[<>=\[\]{}(),;@])"
    r"|(?P<word>[^\s\[\]{}(),;@=<>!]+)"
)

COMPARISONS = ("<", "<=", ">", ">=", "==", "!=")


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(text: str) -> List[Token]:
    """Split a script into tokens with 1-based columns."""
    tokens: List[Token] = []
    position = 0
    while position < len(text):
        match = _TOKEN_PATTERN.match(text, position)
        if match is None:
            raise ParseError(f"Unexpected character {text[position]!r}", column=position + 1)
        kind = match.lastgroup
        if kind != "space":
            tokens.append(Token(kind, match.group(kind), position + 1))
        position = match.end()
    return tokens


# ----------------------------------------------------------------------
# Syntax tree
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ReportRef:
    agent: str
    round: int
    column: int


@dataclass(frozen=True)
class TypeRef:
    """Own type when `agent` is None, otherwise a revealed type."""
    agent: Optional[str]
    round: int
    column: int


Ref = Union[ReportRef, TypeRef]


@dataclass(frozen=True)
class LabelTest:
    ref: Ref
    negate: bool
    label: str
    column: int


@dataclass(frozen=True)
class AnnotationTest:
    ref: Ref
    op: str
    value: Fraction
    column: int


@dataclass(frozen=True)
class Not:
    operand: "Condition"


@dataclass(frozen=True)
class BoolOp:
    op: str
    left: "Condition"
    right: "Condition"


Condition = Union[LabelTest, AnnotationTest, Not, BoolOp]


@dataclass(frozen=True)
class Truth:
    column: int


@dataclass(frozen=True)
class Follow:
    column: int


@dataclass(frozen=True)
class RandomChoice:
    seed: int
    column: int


@dataclass(frozen=True)
class Literal:
    label: str
    column: int


@dataclass(frozen=True)
class Mixture:
    entries: Tuple[Tuple[str, Fraction], ...]
    column: int


@dataclass(frozen=True)
class Conditional:
    condition: Condition
    then: "Expr"
    otherwise: "Expr"


Expr = Union[Truth, Follow, RandomChoice, Literal, Mixture, Conditional]


@dataclass(frozen=True)
class Rule:
    """One rule; `round` is None for `default` and `decide *`."""
    phase: ObservationPhase
    round: Optional[int]
    body: Expr
    column: int


@dataclass(frozen=True)
class Script:
    text: str
    rules: Tuple[Rule, ...]

    def rule_for(self, phase: ObservationPhase, round_index: int) -> Optional[Rule]:
        """Round-specific rule first, then the phase default."""
        fallback = None
        for rule in self.rules:
            if rule.phase != phase:
                continue
            if rule.round == round_index:
                return rule
            if rule.round is None:
                fallback = rule
        return fallback


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------


class _Parser:
    """Recursive-descent parser over the token list."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    def peek(self, offset: int = 0) -> Optional[Token]:
        position = self.index + offset
        return self.tokens[position] if position < len(self.tokens) else None

    def at(self, text: str) -> bool:
        token = self.peek()
        return token is not None and token.text == text

    def next(self) -> Token:
        token = self.peek()
        if token is None:
            raise ParseError("Unexpected end of script", column=len(self.text) + 1)
        self.index += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.next()
        if token.text != text:
            raise ParseError(f"Expected {text!r}, found {token.text!r}", column=token.column)
        return token

    def word(self, what: str) -> Token:
        token = self.next()
        if token.kind != "word":
            raise ParseError(f"Expected {what}, found {token.text!r}", column=token.column)
        return token

    def integer(self, what: str) -> int:
        token = self.word(what)
        if not token.text.isdigit():
            raise ParseError(f"Expected {what}, found {token.text!r}", column=token.column)
        return int(token.text)

    def number(self) -> Fraction:
        token = self.word("a number")
        try:
            return parse_rat(token.text)
        except ParseError:
            raise ParseError(f"Expected a number, found {token.text!r}", column=token.column) from None

    # -- rules ---------------------------------------------------------

    def script(self) -> Script:
        rules: List[Rule] = []
        while self.peek() is not None:
            if self.at(";"):
                self.next()
                continue
            rules.append(self.rule())
            token = self.peek()
            if token is not None and token.text != ";":
                raise ParseError(f"Expected ';' between rules, found {token.text!r}", column=token.column)

        seen = set()
        for rule in rules:
            key = (rule.phase, rule.round)
            if key in seen:
                target = "default" if rule.round is None else f"round {rule.round}"
                raise ParseError(f"Duplicate {rule.phase.value} rule for {target}", column=rule.column)
            seen.add(key)
        return Script(self.text, tuple(rules))

    def rule(self) -> Rule:
        head = self.next()
        if head.text == "round":
            phase, round_index = ObservationPhase.REPORT, self.integer("a round number")
        elif head.text == "default":
            phase, round_index = ObservationPhase.REPORT, None
        elif head.text == "decide":
            phase = ObservationPhase.DECIDE
            if self.at("*"):
                self.next()
                round_index = None
            else:
                round_index = self.integer("a round number or '*'")
        else:
            raise ParseError(
                f"Expected 'round', 'default' or 'decide', found {head.text!r}", column=head.column
            )
        self.expect("=>")
        return Rule(phase, round_index, self.expression(), head.column)

    # -- expressions ---------------------------------------------------

    def expression(self) -> Expr:
        token = self.peek()
        if token is None:
            raise ParseError("Expected an expression", column=len(self.text) + 1)
        if token.text == "if":
            self.next()
            condition = self.condition()
            self.expect("then")
            then = self.expression()
            self.expect("else")
            return Conditional(condition, then, self.expression())
        if token.text == "{":
            return self.mixture()

        token = self.word("an expression")
        if token.text == "truth":
            return Truth(token.column)
        if token.text == "follow":
            return Follow(token.column)
        if token.text == "random":
            return RandomChoice(self.integer("a seed"), token.column)
        return Literal(token.text, token.column)

    def mixture(self) -> Mixture:
        opening = self.expect("{")
        entries: List[Tuple[str, Fraction]] = []
        while True:
            label = self.word("a label")
            self.expect("=")
            entries.append((label.text, self.number()))
            if self.at(","):
                self.next()
                continue
            self.expect("}")
            break
        return Mixture(tuple(entries), opening.column)

    # -- conditions ----------------------------------------------------

    def condition(self) -> Condition:
        left = self.conjunction()
        while self.at("or"):
            self.next()
            left = BoolOp("or", left, self.conjunction())
        return left

    def conjunction(self) -> Condition:
        left = self.negation()
        while self.at("and"):
            self.next()
            left = BoolOp("and", left, self.negation())
        return left

    def negation(self) -> Condition:
        if self.at("not"):
            self.next()
            return Not(self.negation())
        if self.at("("):
            self.next()
            inner = self.condition()
            self.expect(")")
            return inner
        return self.test()

    def test(self) -> Condition:
        token = self.peek()
        following = self.peek(1)
        if token is not None and token.text == "p" and following is not None and following.text == "(":
            self.next()
            self.next()
            ref = self.reference()
            self.expect(")")
            op = self.next()
            if op.text not in COMPARISONS:
                raise ParseError(f"Expected a comparison, found {op.text!r}", column=op.column)
            return AnnotationTest(ref, op.text, self.number(), op.column)

        ref = self.reference()
        op = self.next()
        if op.text not in ("==", "!="):
            raise ParseError(f"Expected '==' or '!=', found {op.text!r}", column=op.column)
        label = self.word("a label")
        return LabelTest(ref, op.text == "!=", label.text, label.column)

    def reference(self) -> Ref:
        head = self.word("'report' or 'type'")
        if head.text not in ("report", "type"):
            raise ParseError(f"Expected 'report' or 'type', found {head.text!r}", column=head.column)
        self.expect("[")
        if head.text == "report":
            agent = self.word("an agent").text
            self.expect("@")
            round_index = self.integer("a round number")
            self.expect("]")
            return ReportRef(agent, round_index, head.column)

        first = self.word("a round or agent")
        if self.at("@"):
            self.next()
            round_index = self.integer("a round number")
            self.expect("]")
            return TypeRef(first.text, round_index, head.column)
        if not first.text.isdigit():
            raise ParseError(f"Expected a round number, found {first.text!r}", column=first.column)
        self.expect("]")
        return TypeRef(None, int(first.text), head.column)


def parse_script(text: str) -> Script:
    """
    Parse a strategy script.

    Raises:
        ParseError: On any grammar violation, with the 1-based column
    """
    return _Parser(text).script()
