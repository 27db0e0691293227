"""
Scenario Document Schema

pydantic models of a scenario file. They check the document's shape only:
names, rounds and labels are bound against each other when the document is
turned into a GameSpec (see scenario_io).

Probabilities and values are written as exact numbers ("1/2", "30%", 4,
"-204"). Labels that YAML would read as something else (YES, NO, "*",
"-", numbers) must be quoted.

Tenet #5: Make Illegal States Unrepresentable
"""

from typing import Annotated, Dict, List, Optional, Tuple

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

from src.core.types import NO_DECISION, WILDCARD


def _as_text(value):
    if isinstance(value, bool):
        raise ValueError("booleans are not labels or numbers; quote YES/NO/true/false")
    if isinstance(value, (int, float)):
        return str(value)
    return value


Text = Annotated[str, BeforeValidator(_as_text)]
Number = Annotated[str, BeforeValidator(_as_text)]


class _Entry(BaseModel):
    model_config = ConfigDict(extra="forbid")


class TypeEntry(_Entry):
    """Type labels of one agent in one round, with optional annotations."""
    agent: Text
    round: int = Field(ge=0)
    labels: List[Text] = Field(min_length=1)
    annotations: Dict[Text, Number] = Field(default_factory=dict)

    @model_validator(mode="after")
    def annotations_name_labels(self) -> "TypeEntry":
        unknown = [label for label in self.annotations if label not in self.labels]
        if unknown:
            raise ValueError(f"annotations name unknown labels {unknown}")
        return self


class KernelEntry(_Entry):
    """
    One kernel row.

    The inputs may be given as separate fields or as
    `when: "(source, public type, public decision, private decision)"`.
    """
    agent: Text
    round: Optional[int] = Field(default=None, ge=1)
    source: Text = WILDCARD
    public_type: Text = WILDCARD
    public_decision: Text = WILDCARD
    private_decision: Text = WILDCARD
    outcomes: Dict[Text, Number] = Field(min_length=1)

    @model_validator(mode="before")
    @classmethod
    def split_when(cls, data):
        if not isinstance(data, dict) or "when" not in data:
            return data
        data = dict(data)
        when = str(data.pop("when")).strip()
        if not (when.startswith("(") and when.endswith(")")):
            raise ValueError(f"'when' must read '(source, public type, public decision, private decision)', got {when!r}")
        parts = [part.strip() for part in when[1:-1].split(",")]
        if len(parts) != 4:
            raise ValueError(f"'when' needs four inputs, got {len(parts)}")
        for name, part in zip(("source", "public_type", "public_decision", "private_decision"), parts):
            if name in data:
                raise ValueError(f"'{name}' is given twice")
            data[name] = part
        return data


class DecisionEntry(_Entry):
    """Decision space of one round."""
    round: int = Field(ge=1)
    public: List[Text] = Field(default_factory=lambda: [NO_DECISION], min_length=1)
    private: Dict[Text, List[Text]] = Field(default_factory=dict)


class UtilityEntry(_Entry):
    """Additive utility rule."""
    agent: Text
    value: Number
    round: Optional[int] = Field(default=None, ge=1)
    public_decision: Text = WILDCARD
    private_decisions: Dict[Text, Text] = Field(default_factory=dict)
    types: Dict[Text, Text] = Field(default_factory=dict)


class StrategyEntry(_Entry):
    """Named strategy; no script means truthful."""
    agent: Text
    name: Text
    script: Optional[str] = None


class AnalysisEntry(_Entry):
    """Analysis defaults."""
    mechanism: str = "balanced"
    measure: str = "total"
    coefficient: Optional[Number] = None
    normalization: Optional[Number] = None


class ScenarioDocument(_Entry):
    """A complete scenario file."""
    name: Text
    description: str = ""
    kind: str = "file"
    horizon: int = Field(ge=0)
    agents: List[Text] = Field(min_length=1)
    parameters: Dict[str, Text] = Field(default_factory=dict)
    types: List[TypeEntry] = Field(default_factory=list)
    kernel: List[KernelEntry] = Field(default_factory=list)
    decisions: List[DecisionEntry] = Field(default_factory=list)
    utilities: List[UtilityEntry] = Field(default_factory=list)
    revelations: List[Tuple[Text, Text]] = Field(default_factory=list)
    strategies: List[StrategyEntry] = Field(default_factory=list)
    table: Dict[Text, List[Text]] = Field(default_factory=dict)
    profiles: Dict[Text, Dict[Text, Text]] = Field(default_factory=dict)
    analysis: AnalysisEntry = Field(default_factory=AnalysisEntry)
    notes: List[str] = Field(default_factory=list)

