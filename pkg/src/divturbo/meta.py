"""Drivers that compose ``m`` single-solution runs into a diverse solution set.

``run_seq`` executes the runs one after another, each constrained by the
elites found before it. ``run_int`` interleaves them over several phases: in
phase one every run contributes an elite, in later phases each run resumes
with a fresh trust region against the other runs' current elites and its
result overwrites its own slot.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from . import divturbo1
from .diversity import EliteSet
from .divturbo1 import DivTurboConfig, RunState
from .exceptions import InsufficientBudget
from .objectives import BudgetedEvaluator, ObjectiveFunction

logger = logging.getLogger(__name__)


@dataclass
class MetaConfig:
    """Settings shared by both drivers.

    Per-run budgets are ``B // m`` (sequential) and ``B // (m * max_phases)``
    per phase (interleaving); remainders are never spent. ``seeds`` gives one
    seed per run; when omitted they are spawned from ``base_seed``.
    """

    total_budget: int
    tau: float
    m: int = 10
    max_phases: int = 5
    seeds: list | None = None
    base_seed: int = 0
    guarded_replacement: bool = False
    turbo: DivTurboConfig = field(default_factory=DivTurboConfig)

    def __post_init__(self):
        if self.m < 1 or self.max_phases < 1 or self.total_budget < 1:
            raise ValueError("m, max_phases and total_budget must be positive")
        if self.seeds is not None and len(self.seeds) != self.m:
            raise ValueError("need exactly one seed per run")

    def run_seeds(self) -> list:
        if self.seeds is not None:
            return list(self.seeds)
        return np.random.SeedSequence(self.base_seed).spawn(self.m)

    def turbo_for(self, i: int) -> DivTurboConfig:
        return replace(self.turbo, seed=self.run_seeds()[i])

    @property
    def run_budget(self) -> int:
        return self.total_budget // self.m

    @property
    def phase_budget(self) -> int:
        return self.total_budget // (self.m * self.max_phases)


@dataclass
class RunSummary:
    """Outcome of one run (or one phase of a run) inside a driver."""

    run: int
    phase: int
    x: np.ndarray
    value: float
    feasible: bool
    evals_used: int
    replaced: bool = True


@dataclass
class MetaResult:
    elites: EliteSet
    summaries: list
    states: list
    evaluator: BudgetedEvaluator

    @property
    def evals_used(self) -> int:
        return self.evaluator.used

    @property
    def mean_value(self) -> float:
        return float(np.mean(self.elites.values))


def budget_rule(dim: int, m: int = 10, scale: int = 1) -> int:
    """Total budget ``(100 + 10 D) * m``, optionally multiplied by ``scale``."""
    return (100 + 10 * dim) * m * scale


def _check_budget(per_run: int, dim: int, config: MetaConfig, what: str) -> None:
    n_init = config.turbo.initial_points(dim)
    if per_run < n_init:
        raise InsufficientBudget(f"{what} budget {per_run} is below the {n_init} initial points")


def run_seq(objective: ObjectiveFunction, config: MetaConfig,
            evaluator: BudgetedEvaluator | None = None) -> MetaResult:
    per_run = config.run_budget
    _check_budget(per_run, objective.dim, config, "per-run")
    evaluator = evaluator or BudgetedEvaluator(objective, config.total_budget)
    elites = EliteSet(config.tau)
    summaries, states = [], []
    for i in range(config.m):
        start = evaluator.used
        best, state = divturbo1.run(evaluator, elites, config.turbo_for(i), max_evals=per_run)
        elites = elites.appended(best.x, best.value, best.feasible)
        summaries.append(RunSummary(i, 1, best.x, best.value, best.feasible, evaluator.used - start))
        states.append(state)
        logger.debug("run %d: value %.6g feasible %s", i, best.value, best.feasible)
    return MetaResult(elites, summaries, states, evaluator)


def run_int(objective: ObjectiveFunction, config: MetaConfig,
            evaluator: BudgetedEvaluator | None = None) -> MetaResult:
    per_phase = config.phase_budget
    _check_budget(per_phase, objective.dim, config, "per-phase")
    evaluator = evaluator or BudgetedEvaluator(objective, config.total_budget)
    elites = EliteSet(config.tau)
    states: list[RunState] = []
    summaries = []

    for i in range(config.m):
        start = evaluator.used
        best, state = divturbo1.run(evaluator, elites, config.turbo_for(i), max_evals=per_phase)
        elites = elites.appended(best.x, best.value, best.feasible)
        states.append(state)
        summaries.append(RunSummary(i, 1, best.x, best.value, best.feasible, evaluator.used - start))

    for phase in range(2, config.max_phases + 1):
        for i in range(config.m):
            start = evaluator.used
            others = elites.without(i)
            best, states[i] = divturbo1.run(
                evaluator, others, config.turbo_for(i), resume=states[i], max_evals=per_phase
            )
            # feasibility is judged against the other elites only
            accept = True
            if config.guarded_replacement:
                if elites.flags[i]:
                    accept = best.feasible and best.value <= elites.values[i]
                else:
                    accept = best.feasible or best.value <= elites.values[i]
            if accept:
                elites = elites.replaced(i, best.x, best.value, best.feasible)
            summaries.append(
                RunSummary(i, phase, best.x, best.value, best.feasible, evaluator.used - start, accept)
            )
    return MetaResult(elites, summaries, states, evaluator)
