"""
Run Configuration

Limits and output options shared by the CLI commands. Values come from
keyword arguments, with TALLY_* environment variables (optionally from a
.env file) overriding the caps.

Tenet #9: Configuration over code
Tenet #5: Make Illegal States Unrepresentable
"""

import os
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from typing import Optional, Tuple

from dotenv import load_dotenv

from src.mechanisms.shapley import DEFAULT_MAX_SHAPLEY_AGENTS
from src.policy.efficient_policy import DEFAULT_MAX_POLICY_STATES

from .play import DEFAULT_MAX_PATHS

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")
OUTPUT_FORMATS = ("text", "csv", "json")

ENV_MAX_PATHS = "TALLY_MAX_PATHS"
ENV_MAX_POLICY_STATES = "TALLY_MAX_POLICY_STATES"
ENV_LOG_LEVEL = "TALLY_LOG_LEVEL"


@dataclass(frozen=True)
class RunConfig:
    """
    Configuration of one CLI run.

    Attributes:
        max_paths: Cap on enumerated paths of play
        max_policy_states: Cap on (round, profile) states of the policy
        max_shapley_agents: Cap on agents for Shapley averaging (n! orders)
        samples: Monte Carlo sample count
        seed: Seed for sampling and random games
        mechanism: Mechanism name
        order: Update order for the sequential rule
        normalization: Display factor for normal-form tables
        output_format: text, csv or json
        decimal: Decimal places for display (None = exact fractions)
        log_level: structlog level name
    """
    max_paths: int = DEFAULT_MAX_PATHS
    max_policy_states: int = DEFAULT_MAX_POLICY_STATES
    max_shapley_agents: int = DEFAULT_MAX_SHAPLEY_AGENTS
    samples: int = 100_000
    seed: int = 0
    mechanism: str = "balanced"
    order: Optional[Tuple[str, ...]] = None
    normalization: Optional[Fraction] = None
    output_format: str = "text"
    decimal: Optional[int] = None
    log_level: str = "WARNING"

    def __post_init__(self):
        """Validate configuration."""
        for name in ("max_paths", "max_policy_states", "max_shapley_agents", "samples"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.seed < 0:
            raise ValueError(f"Seed must be non-negative, got {self.seed}")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"Output format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}")
        if self.decimal is not None and not 0 <= self.decimal <= 30:
            raise ValueError(f"Decimal places must be 0-30, got {self.decimal}")
        if self.normalization is not None and self.normalization <= 0:
            raise ValueError(f"Normalization must be positive, got {self.normalization}")
        if self.log_level not in LOG_LEVELS:
            raise ValueError(f"Log level must be one of {LOG_LEVELS}, got {self.log_level!r}")

    @classmethod
    def from_env(cls, **overrides) -> "RunConfig":
        """
        Build a configuration, letting TALLY_* variables override the caps.

        Explicit keyword arguments that are not None win over the environment.
        """
        load_dotenv()
        values = {}
        if os.getenv(ENV_MAX_PATHS):
            values["max_paths"] = _env_int(ENV_MAX_PATHS)
        if os.getenv(ENV_MAX_POLICY_STATES):
            values["max_policy_states"] = _env_int(ENV_MAX_POLICY_STATES)
        if os.getenv(ENV_LOG_LEVEL):
            values["log_level"] = os.environ[ENV_LOG_LEVEL].upper()
        known = {field.name for field in fields(cls)}
        for name, value in overrides.items():
            if name not in known:
                raise ValueError(f"Unknown configuration field {name!r}")
            if value is not None:
                values[name] = value
        return cls(**values)

    def with_overrides(self, **changes) -> "RunConfig":
        return replace(self, **{name: value for name, value in changes.items() if value is not None})

    def to_dict(self) -> dict:
        """Convert to dictionary for logging."""
        return {
            "limits": {
                "max_paths": self.max_paths,
                "max_policy_states": self.max_policy_states,
                "max_shapley_agents": self.max_shapley_agents,
            },
            "sampling": {"samples": self.samples, "seed": self.seed},
            "mechanism": {"name": self.mechanism, "order": list(self.order) if self.order else None},
            "output": {
                "format": self.output_format,
                "decimal": self.decimal,
                "normalization": str(self.normalization) if self.normalization is not None else None,
            },
            "log_level": self.log_level,
        }


def _env_int(name: str) -> int:
    raw = os.environ[name]
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}") from None
