"""
Scenarios - built-in games, their strategy libraries and scenario files.
"""

from .chains import IDLE, NO, YES, martingale_step, probability_chain
from .collusion import build_collusion
from .coordination import build_appendix_b, mixed_low_probability
from .counterexample import build_appendix_a, reduced_game_sets
from .example1 import ProcessVariant, build_example1, price_coefficient
from .random_games import random_game
from .registry import ScenarioEntry, available_scenarios, build_scenario, scenario_entry
from .scenario import TRUTHFUL_PROFILE, Scenario, ScenarioKind, cell_profiles
from .scenario_io import export_scenario, load_scenario, parse_scenario, save_scenario
from .schema import ScenarioDocument
from .yes_no import build_yesno

__all__ = [
    "IDLE",
    "NO",
    "TRUTHFUL_PROFILE",
    "YES",
    "ProcessVariant",
    "Scenario",
    "ScenarioDocument",
    "ScenarioEntry",
    "ScenarioKind",
    "available_scenarios",
    "build_appendix_a",
    "build_appendix_b",
    "build_collusion",
    "build_example1",
    "build_scenario",
    "build_yesno",
    "cell_profiles",
    "export_scenario",
    "load_scenario",
    "martingale_step",
    "mixed_low_probability",
    "parse_scenario",
    "price_coefficient",
    "probability_chain",
    "random_game",
    "reduced_game_sets",
    "save_scenario",
    "scenario_entry",
]
