"""
CLI - command-line front end for scenarios, tables, ledgers and verifications.
"""

from .app import build_parser, main, run
from .commands import CHECKS, EXIT_FAILED, EXIT_OK, EXIT_USAGE, CommandContext, CommandResult

__all__ = [
    "CHECKS",
    "EXIT_FAILED",
    "EXIT_OK",
    "EXIT_USAGE",
    "CommandContext",
    "CommandResult",
    "build_parser",
    "main",
    "run",
]
