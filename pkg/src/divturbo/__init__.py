"""Diversity-aware trust-region Bayesian optimisation.

Finds ``m`` good solutions of an expensive black-box function that are
pairwise at least ``tau`` apart, by chaining single trust-region runs
sequentially (:func:`run_seq`) or interleaved over phases (:func:`run_int`),
with a rank-ordered multi-region baseline (:func:`run_robot`).
"""

from .diversity import EliteSet, best_diverse, distance, filter_tau, min_distance_to_set, select_center
from .divturbo1 import DivTurboConfig, RunState
from .divturbo1 import run as run_divturbo1
from .exceptions import (
    BudgetExhausted,
    ConfigError,
    DimensionMismatch,
    EmptyInput,
    InsufficientBudget,
    OutOfDomain,
    SingularKernel,
    UnsupportedDim,
)
from .meta import MetaConfig, budget_rule, run_int, run_seq
from .objectives import BudgetedEvaluator, Domain, ObjectiveFunction, catalogue, sample_uniform
from .robot import run_robot

__version__ = "0.1.0"
