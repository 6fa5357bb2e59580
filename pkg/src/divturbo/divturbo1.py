"""Single trust-region Bayesian optimisation that returns one solution kept at
least ``tau`` away from a fixed reference elite set.

With an empty elite set the run reduces to plain TuRBO-1. A run can be paused
(its :class:`RunState` returned) and resumed later against a different elite
set; resumption keeps the run's archive and starts a fresh trust region.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import surrogate
from . import trust_region as trm
from .diversity import DiverseChoice, EliteSet, best_diverse, min_distances, select_center
from .exceptions import BudgetExhausted
from .objectives import BudgetedEvaluator, Domain
from .surrogate import GpHyperparams, GpModel

logger = logging.getLogger(__name__)

RELATIVE_IMPROVEMENT = 1e-3


@dataclass
class DivTurboConfig:
    """Optimiser settings. ``None`` entries resolve from the dimension:
    ``n_init = 2 D``, ``n_candidates = min(100 D, 5000)`` and
    ``failure_tolerance = ceil(max(4, D) / n_batch)``.

    The diversity threshold is carried by the :class:`EliteSet` passed to
    :func:`run`, not by this config.
    """

    n_init: int | None = None
    n_batch: int = 4
    n_candidates: int | None = None
    success_tolerance: int = 3
    failure_tolerance: int | None = None
    length_init: float = trm.LENGTH_INIT
    length_min: float = trm.LENGTH_MIN
    length_max: float = trm.LENGTH_MAX
    consecutive_infeasible_limit: int = 3
    surrogate_data: str = "tr"  # "tr" (region archive) or "global"
    gp_restarts: int = 3
    gp_maxiter: int = 50
    seed: int | np.random.SeedSequence | None = 0

    def __post_init__(self):
        if self.n_init is not None and self.n_init < 2:
            raise ValueError("n_init must be at least 2")
        if self.n_batch < 1:
            raise ValueError("n_batch must be at least 1")
        if self.consecutive_infeasible_limit < 1:
            raise ValueError("consecutive_infeasible_limit must be at least 1")
        if self.surrogate_data not in ("tr", "global"):
            raise ValueError("surrogate_data must be 'tr' or 'global'")

    def initial_points(self, dim: int) -> int:
        return self.n_init if self.n_init is not None else 2 * dim

    def candidates(self, dim: int) -> int:
        return self.n_candidates if self.n_candidates is not None else trm.default_n_candidates(dim)

    def new_region(self, dim: int) -> trm.TrustRegionState:
        return trm.TrustRegionState(
            dim=dim,
            n_batch=self.n_batch,
            base_length=self.length_init,
            length_init=self.length_init,
            length_min=self.length_min,
            length_max=self.length_max,
            success_tolerance=self.success_tolerance,
            failure_tolerance=self.failure_tolerance,
        )


@dataclass
class RunState:
    """Everything needed to continue a run: archive, live region, surrogate
    hyperparameters and the run's own random stream."""

    dim: int
    rng: np.random.Generator
    X: list = field(default_factory=list)  # physical coordinates, evaluation order
    fX: list = field(default_factory=list)
    eval_index: list = field(default_factory=list)  # index in the evaluator's audit log
    tr_idx: list = field(default_factory=list)  # archive rows belonging to the live region
    tr: trm.TrustRegionState | None = None
    hyper: GpHyperparams | None = None
    infeasible_center_streak: int = 0
    evals_used: int = 0
    restarts: list = field(default_factory=list)  # (evals_used, reason)
    centers: list = field(default_factory=list)  # (archive row, was_feasible)

    @property
    def archive_x(self) -> np.ndarray:
        return np.array(self.X).reshape(-1, self.dim)

    @property
    def archive_f(self) -> np.ndarray:
        return np.array(self.fX, dtype=float)

    @property
    def tr_x(self) -> np.ndarray:
        return self.archive_x[self.tr_idx]

    @property
    def tr_f(self) -> np.ndarray:
        return self.archive_f[self.tr_idx]

    def record(self, x, value: float, index: int) -> int:
        self.X.append(np.asarray(x, dtype=float))
        self.fX.append(float(value))
        self.eval_index.append(int(index))
        self.evals_used += 1
        return len(self.X) - 1


def _evaluate_rows(evaluator: BudgetedEvaluator, state: RunState, X: np.ndarray) -> list[int]:
    rows = []
    for x in X:
        index = evaluator.used
        value = evaluator.evaluate(x)
        rows.append(state.record(x, value, index))
    return rows


def select_batch(
    candidates,
    model: GpModel,
    elite_set: EliteSet,
    n_batch: int,
    rng: np.random.Generator,
    domain: Domain | None = None,
) -> np.ndarray:
    """Choose ``n_batch`` candidates (unit-cube rows) respecting the elites.

    Thompson sampling runs over the tau-feasible candidates only. When fewer
    than ``n_batch`` are feasible, all of them are taken and the rest of the
    batch is filled with the infeasible candidates farthest from the elites.
    ``domain`` maps candidates to physical coordinates for the distance test.
    """
    C = np.atleast_2d(np.asarray(candidates, dtype=float))
    if n_batch > len(C):
        raise ValueError(f"cannot select {n_batch} from {len(C)} candidates")
    phys = domain.from_unit(C) if domain is not None else C
    dmin = min_distances(phys, elite_set)
    feasible = np.flatnonzero(dmin >= elite_set.tau)
    if len(feasible) >= n_batch:
        pick = feasible[surrogate.thompson_select(model, C[feasible], n_batch, rng)]
    else:
        infeasible = np.flatnonzero(dmin < elite_set.tau)
        far = infeasible[np.argsort(-dmin[infeasible], kind="stable")]
        pick = np.concatenate([feasible, far[: n_batch - len(feasible)]])
    return C[pick]


def _best_feasible_value(values: np.ndarray, points: np.ndarray, elite_set: EliteSet) -> float | None:
    if len(values) == 0:
        return None
    mask = min_distances(points, elite_set) >= elite_set.tau
    return float(values[mask].min()) if mask.any() else None


def batch_improved(incumbent: float | None, new_best: float | None) -> bool:
    """Relative-improvement test on best tau-feasible values."""
    if new_best is None:
        return False
    if incumbent is None:
        return True
    return new_best < incumbent - RELATIVE_IMPROVEMENT * abs(incumbent)


def propose(
    tr: trm.TrustRegionState,
    train_x: np.ndarray,
    train_f: np.ndarray,
    hyper: GpHyperparams | None,
    elite_set: EliteSet,
    config: DivTurboConfig,
    domain: Domain,
    n_batch: int,
    rng: np.random.Generator,
) -> tuple[np.ndarray, GpModel]:
    """Fit the local surrogate and return the next batch (unit-cube rows).

    ``tr.center`` must already be set. Shared by :func:`run` and the
    multi-region baseline so both consume random numbers identically.
    """
    model = surrogate.fit(
        domain.to_unit(train_x), train_f, prior_hyper=hyper, rng=rng,
        n_restarts=config.gp_restarts, maxiter=config.gp_maxiter,
    )
    cands = trm.generate_candidates(tr, model.hyper.lengthscales, config.candidates(tr.dim), rng)
    batch = select_batch(cands, model, elite_set, n_batch, rng, domain=domain)
    return batch, model


def run(
    evaluator: BudgetedEvaluator,
    elite_set: EliteSet,
    config: DivTurboConfig | None = None,
    resume: RunState | None = None,
    max_evals: int | None = None,
) -> tuple[DiverseChoice, RunState]:
    """Run (or resume) the optimiser and return its best diverse solution.

    Consumes exactly ``min(max_evals, evaluator.remaining)`` evaluations. A
    fresh start needs at least ``n_init`` of them.
    """
    config = config or DivTurboConfig()
    domain = evaluator.objective.domain
    dim = domain.dim
    n_init = config.initial_points(dim)
    allocation = evaluator.remaining if max_evals is None else min(max_evals, evaluator.remaining)

    if resume is None:
        if allocation < n_init:
            raise BudgetExhausted(f"need {n_init} evaluations to start, have {allocation}")
        seed = config.seed
        rng = np.random.default_rng(seed)
        state = RunState(dim=dim, rng=rng)
    else:
        state = resume
    rng = state.rng

    spent = 0
    while spent < allocation:
        state.tr = config.new_region(dim)
        state.infeasible_center_streak = 0
        n = min(n_init, allocation - spent)
        X0 = domain.from_unit(rng.random((n, dim)))
        state.tr_idx = _evaluate_rows(evaluator, state, X0)
        spent += n

        while spent < allocation:
            if state.tr.restart_required:
                state.restarts.append((state.evals_used, "length"))
                break
            tr_x, tr_f = state.tr_x, state.tr_f
            choice = select_center(tr_x, tr_f, elite_set)
            state.centers.append((state.tr_idx[choice.index], choice.feasible))
            if choice.feasible:
                state.infeasible_center_streak = 0
            else:
                state.infeasible_center_streak += 1
                if state.infeasible_center_streak >= config.consecutive_infeasible_limit:
                    state.restarts.append((state.evals_used, "infeasible"))
                    logger.debug("restart after %d infeasible centres", state.infeasible_center_streak)
                    break
            state.tr.center = domain.to_unit(choice.x)

            if config.surrogate_data == "global":
                train_x, train_f = state.archive_x, state.archive_f
            else:
                train_x, train_f = tr_x, tr_f
            batch_size = min(config.n_batch, allocation - spent)
            U, model = propose(state.tr, train_x, train_f, state.hyper, elite_set, config,
                               domain, batch_size, rng)
            state.hyper = model.hyper

            incumbent = _best_feasible_value(tr_f, tr_x, elite_set)
            X_next = domain.from_unit(U)
            rows = _evaluate_rows(evaluator, state, X_next)
            spent += len(rows)
            new_best = _best_feasible_value(state.archive_f[rows], X_next, elite_set)
            trm.update(state.tr, batch_improved(incumbent, new_best))
            state.tr_idx.extend(rows)

    best = best_diverse(state.archive_x, state.archive_f, elite_set)
    return best, state
