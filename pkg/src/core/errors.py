"""
Tally Exceptions

Tenet #4: Fail Loud, Fail Early
- Every failure is a specific, documented exception
- Every exception carries the offending state as structured context
"""

from typing import Any, Dict, Optional


class TallyError(Exception):
    """
    Base class for all Tally errors.

    Attributes:
        context: Structured description of the offending state, suitable
                 for passing straight into a structlog event.
    """

    def __init__(self, message: str, **context: Any):
        super().__init__(message)
        self.context: Dict[str, Any] = context

    def to_dict(self) -> dict:
        """Convert to dictionary for logging and JSON reports."""
        return {"error": type(self).__name__, "message": str(self), **self.context}


class ValidationError(TallyError, ValueError):
    """A game description or argument violates a model invariant."""


class DanglingKernelEntry(ValidationError):
    """A kernel row references an unknown label, or a reachable kernel input has no row."""


class UndefinedKernelEntry(ValidationError):
    """No kernel row matches the requested (type, public type, decisions) input."""


class NonUnitDistribution(ValidationError):
    """Distribution weights are negative or do not sum exactly to 1."""


class MissingUtility(ValidationError):
    """A utility rule references an unknown agent, round, label or decision."""


class ProfileShapeMismatch(ValidationError):
    """A mixed-round reported profile does not fit the game's agents or rounds."""


class UnboundScriptReference(ValidationError):
    """A strategy script reads information the agent cannot observe."""


class ParseError(TallyError, ValueError):
    """
    A scenario file or strategy script does not follow the documented grammar.

    Attributes:
        message: Message without the location suffix
        line: 1-based line of the offending text, when known
        column: 1-based column of the offending text, when known
    """

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        **context: Any,
    ):
        location = ""
        if line is not None:
            location = f" (line {line}" + (f", column {column})" if column is not None else ")")
        elif column is not None:
            location = f" (column {column})"
        super().__init__(f"{message}{location}", line=line, column=column, **context)
        self.message = message
        self.line = line
        self.column = column


class HypothesisViolated(TallyError):
    """A check was requested on a profile or scenario outside its hypotheses."""


class ResourceLimitExceeded(TallyError):
    """Enumeration would exceed a configured path, state or permutation cap."""


class CertificateFailure(TallyError):
    """A guarantee certificate failed; context names the agent and the witness."""


class UnreachableObservation(TallyError):
    """A strategy has no answer for an observation that play actually reaches."""
