"""Rank-ordered multi-trust-region baseline.

``m`` trust regions advance in lockstep. Region ``i`` picks its centre from its
own archive with the best-diverse rule against the current centres of regions
``0..i-1``, so the rank-0 region is an unconstrained TuRBO-1 region. Each
region keeps its own local surrogate and random stream; the returned elite set
holds the final centres.

This mirrors the surrogate and trust-region machinery of :mod:`.divturbo1` so
comparisons isolate the coordination scheme.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import trust_region as trm
from .diversity import EliteSet, best_diverse, min_distance_to_set
from .divturbo1 import DivTurboConfig, RunState, _best_feasible_value, _evaluate_rows, batch_improved, propose
from .exceptions import InsufficientBudget
from .objectives import BudgetedEvaluator, ObjectiveFunction


@dataclass
class RobotState:
    regions: list  # one RunState per rank; RunState.tr is the region
    tau: float
    center_log: list = field(default_factory=list)  # (iteration, rank, min_dist_to_higher, feasible)

    @property
    def shared_archive(self) -> tuple[np.ndarray, np.ndarray]:
        X = np.vstack([r.archive_x for r in self.regions])
        f = np.concatenate([r.archive_f for r in self.regions])
        return X, f


@dataclass
class RobotResult:
    elites: EliteSet
    state: RobotState
    evaluator: BudgetedEvaluator

    @property
    def evals_used(self) -> int:
        return self.evaluator.used

    @property
    def mean_value(self) -> float:
        return float(np.mean(self.elites.values))


def region_seeds(m: int, base_seed) -> list:
    return np.random.SeedSequence(base_seed).spawn(m)


def _centers(state: RobotState, tau: float) -> tuple[EliteSet, list]:
    """Rank-ordered centre selection over every region's current archive."""
    higher = EliteSet(tau)
    choices = []
    for r in state.regions:
        c = best_diverse(r.tr_x, r.tr_f, higher)
        choices.append(c)
        higher = higher.appended(c.x, c.value, c.feasible)
    return higher, choices


def run_robot(
    objective: ObjectiveFunction,
    m: int,
    budget: int,
    tau: float,
    config: DivTurboConfig | None = None,
    seeds: list | None = None,
    base_seed: int = 0,
    evaluator: BudgetedEvaluator | None = None,
) -> RobotResult:
    """Optimise ``m`` ranked regions in lockstep until ``budget`` is spent."""
    config = config or DivTurboConfig()
    domain = objective.domain
    dim = domain.dim
    n_init = config.initial_points(dim)
    if budget < m * n_init:
        raise InsufficientBudget(f"budget {budget} below {m} x {n_init} initial points")
    seeds = list(seeds) if seeds is not None else region_seeds(m, base_seed)
    evaluator = evaluator or BudgetedEvaluator(objective, budget)
    budget = min(budget, evaluator.remaining)
    start = evaluator.used

    def left() -> int:
        return budget - (evaluator.used - start)

    def init_region(r: RunState) -> None:
        r.tr = config.new_region(dim)
        n = min(n_init, left())
        X0 = domain.from_unit(r.rng.random((n, dim)))
        r.tr_idx = _evaluate_rows(evaluator, r, X0)

    state = RobotState([RunState(dim=dim, rng=np.random.default_rng(s)) for s in seeds], tau)
    for r in state.regions:
        init_region(r)

    iteration = 0
    while left() > 0:
        higher = EliteSet(tau)
        for rank, r in enumerate(state.regions):
            if left() <= 0:
                break
            if r.tr.restart_required:
                r.restarts.append((r.evals_used, "length"))
                init_region(r)
                c = best_diverse(r.tr_x, r.tr_f, higher)
                higher = higher.appended(c.x, c.value, c.feasible)
                continue
            choice = best_diverse(r.tr_x, r.tr_f, higher)
            dmin = min_distance_to_set(choice.x, higher)
            state.center_log.append((iteration, rank, dmin, choice.feasible))
            r.centers.append((r.tr_idx[choice.index], choice.feasible))
            r.tr.center = domain.to_unit(choice.x)
            constraint = higher
            higher = higher.appended(choice.x, choice.value, choice.feasible)

            batch_size = min(config.n_batch, left())
            U, model = propose(r.tr, r.tr_x, r.tr_f, r.hyper, constraint, config, domain, batch_size, r.rng)
            r.hyper = model.hyper
            incumbent = _best_feasible_value(r.tr_f, r.tr_x, constraint)
            X_next = domain.from_unit(U)
            rows = _evaluate_rows(evaluator, r, X_next)
            new_best = _best_feasible_value(r.archive_f[rows], X_next, constraint)
            trm.update(r.tr, batch_improved(incumbent, new_best))
            r.tr_idx.extend(rows)
        iteration += 1

    elites, _ = _centers(state, tau)
    return RobotResult(elites, state, evaluator)

