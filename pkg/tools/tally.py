#!/usr/bin/env python3
"""
Tally CLI

Runs scenarios, renders payoff tables and ledgers, and drives the
verification suites from a checkout without installing the package.

Examples:
    tools/tally.py scenario list
    tools/tally.py table --scenario appendixA --normalize 1/3
    tools/tally.py verify balance --scenario collusion --mechanism unbalanced
"""

import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.cli import main


if __name__ == "__main__":
    main()
