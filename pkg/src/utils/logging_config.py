"""
Logging Configuration

Structured logging for the library and the CLI. Events go to stderr so that
tables, ledgers and JSON reports on stdout stay machine-readable.

Tenet #10: Observable Systems
"""

import logging
import sys

import structlog

DEFAULT_LEVEL = "WARNING"


def configure_logging(level: str = DEFAULT_LEVEL, json_output: bool = False) -> None:
    """
    Configure structlog processors.

    Args:
        level: Minimum level name (DEBUG, INFO, WARNING, ERROR)
        json_output: Render events as JSON lines instead of console text

    Example:
        configure_logging("INFO")
        structlog.get_logger().info("paths_enumerated", paths=16)
    """
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise ValueError(f"Unknown log level {level!r}")

    renderer = structlog.processors.JSONRenderer() if json_output else structlog.dev.ConsoleRenderer()
    structlog.configure(
        processors=[
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.add_log_level,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
