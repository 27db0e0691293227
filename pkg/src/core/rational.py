"""
Exact rational arithmetic helpers.

All probabilities and payoffs are `fractions.Fraction` values. Floating point
only appears when formatting output with an explicit number of decimals.
"""

import re
from fractions import Fraction
from typing import Optional, Union

from .errors import ParseError

Rat = Fraction

_RAT_PATTERN = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")
_PERCENT_PATTERN = re.compile(r"^\s*([+-]?\d+(?:\.\d+)?)\s*%\s*$")
_DECIMAL_PATTERN = re.compile(r"^\s*[+-]?\d*\.\d+\s*$")


def parse_rat(text: Union[str, int, Fraction]) -> Fraction:
    """
    Parse an exact rational from text.

    Accepts integers ("3", "-10"), fractions ("5/6"), decimals ("0.25")
    and percentages ("30%"). Decimals are read exactly, never through float.

    Raises:
        ParseError: If the text is not a rational literal or has a zero denominator
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise ParseError(f"Expected a rational number, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)

    raw = str(text)
    match = _RAT_PATTERN.match(raw)
    if match:
        numerator, denominator = match.group(1), match.group(2)
        if denominator is not None and int(denominator) == 0:
            raise ParseError(f"Zero denominator in {raw!r}")
        return Fraction(int(numerator), int(denominator) if denominator else 1)

    match = _PERCENT_PATTERN.match(raw)
    if match:
        return Fraction(match.group(1)) / 100

    if _DECIMAL_PATTERN.match(raw):
        return Fraction(raw.strip())

    raise ParseError(f"Expected a rational number, got {raw!r}")


def format_rat(value: Fraction, decimal: Optional[int] = None) -> str:
    """
    Render a rational for display.

    Exact form is "p/q" (or "p" for integers). With `decimal=k` the value is
    rounded to k places for display only.
    """
    if decimal is not None:
        return f"{float(value):.{decimal}f}"
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_percent(value: Fraction) -> str:
    """Render a probability as a percentage label ("30%", "12.5%")."""
    scaled = value * 100
    if scaled.denominator == 1:
        return f"{scaled.numerator}%"
    text = f"{float(scaled):.6f}".rstrip("0").rstrip(".")
    if Fraction(text) != scaled:
        raise ParseError(f"Probability {value} has no finite percentage form")
    return f"{text}%"
