"""
Analysis - exact evaluation, normal forms, dominance, equilibria and certificates.
"""

from .best_response import (
    DEFAULT_MAX_NODES,
    BestResponse,
    Objective,
    PlayTree,
    best_response_value,
    coalition_value,
)
from .budget import BudgetVerdict, budget_balance_check, budget_balance_over_paths
from .certificates import (
    CoalitionBound,
    GuaranteeCertificate,
    MartingaleReport,
    MartingaleResidual,
    verify_guarantee,
    verify_martingale,
)
from .dominance import (
    DominanceMode,
    EliminationOrder,
    EliminationStep,
    EliminationTrace,
    dominates,
    eliminate_dominated,
    verify_trace,
)
from .equilibrium import DeviationWitness, NashVerdict, nash_check
from .lemmas import DeltaTrace, LemmaCheck, delta_trace, lemma_general_check, lemma_parity_check
from .monte_carlo import MonteCarloEstimate, monte_carlo_payoffs
from .normal_form import NormalForm, induced_normal_form
from .oracle import brute_force_payoffs

__all__ = [
    "DEFAULT_MAX_NODES",
    "BestResponse",
    "BudgetVerdict",
    "CoalitionBound",
    "DeltaTrace",
    "DeviationWitness",
    "DominanceMode",
    "EliminationOrder",
    "EliminationStep",
    "EliminationTrace",
    "GuaranteeCertificate",
    "LemmaCheck",
    "MartingaleReport",
    "MartingaleResidual",
    "MonteCarloEstimate",
    "NashVerdict",
    "NormalForm",
    "Objective",
    "PlayTree",
    "best_response_value",
    "brute_force_payoffs",
    "budget_balance_check",
    "budget_balance_over_paths",
    "coalition_value",
    "delta_trace",
    "dominates",
    "eliminate_dominated",
    "induced_normal_form",
    "lemma_general_check",
    "lemma_parity_check",
    "monte_carlo_payoffs",
    "nash_check",
    "verify_guarantee",
    "verify_martingale",
]
