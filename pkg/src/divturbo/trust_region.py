"""Adaptive hypercube trust region (single-region TuRBO dynamics).

All coordinates handled here are in the unit cube.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import qmc

LENGTH_INIT = 0.8
LENGTH_MIN = 0.5**7
LENGTH_MAX = 1.6


def default_failure_tolerance(dim: int, n_batch: int) -> int:
    return math.ceil(max(4.0, dim) / n_batch)


def default_n_candidates(dim: int) -> int:
    return min(100 * dim, 5000)


@dataclass
class TrustRegionState:
    dim: int
    n_batch: int = 4
    base_length: float = LENGTH_INIT
    center: np.ndarray | None = None
    success_count: int = 0
    failure_count: int = 0
    length_init: float = LENGTH_INIT
    length_min: float = LENGTH_MIN
    length_max: float = LENGTH_MAX
    success_tolerance: int = 3
    failure_tolerance: int | None = None

    def __post_init__(self):
        if self.failure_tolerance is None:
            self.failure_tolerance = default_failure_tolerance(self.dim, self.n_batch)

    @property
    def restart_required(self) -> bool:
        return self.base_length < self.length_min


def side_lengths(state: TrustRegionState, lengthscales) -> np.ndarray:
    """Per-dimension side lengths, ARD-weighted with unit geometric mean."""
    ls = np.asarray(lengthscales, dtype=float)
    weights = ls / np.exp(np.mean(np.log(ls)))
    return state.base_length * weights


def bounds(state: TrustRegionState, lengthscales, center=None) -> tuple[np.ndarray, np.ndarray]:
    """Box of the region around ``center`` intersected with the unit cube."""
    c = state.center if center is None else np.asarray(center, dtype=float)
    half = side_lengths(state, lengthscales) / 2.0
    return np.clip(c - half, 0.0, 1.0), np.clip(c + half, 0.0, 1.0)


def update(state: TrustRegionState, batch_improved: bool) -> TrustRegionState:
    """Success/failure bookkeeping; expands after ``success_tolerance`` consecutive
    successes, halves after ``failure_tolerance`` consecutive failures."""
    if batch_improved:
        state.success_count += 1
        state.failure_count = 0
        if state.success_count == state.success_tolerance:
            state.base_length = min(2.0 * state.base_length, state.length_max)
            state.success_count = 0
    else:
        state.failure_count += 1
        state.success_count = 0
        if state.failure_count == state.failure_tolerance:
            state.base_length /= 2.0
            state.failure_count = 0
    return state


def restart(state: TrustRegionState, rng: np.random.Generator | None = None) -> TrustRegionState:
    """Fresh region with the same configuration; the centre is left unset.

    ``rng`` is accepted for call-site symmetry; the reset itself draws nothing.
    """
    return replace(state, base_length=state.length_init, center=None, success_count=0, failure_count=0)


def sobol_points(n: int, dim: int, rng: np.random.Generator) -> np.ndarray:
    """First ``n`` points of a scrambled Sobol sequence seeded from ``rng``.

    The scramble seed is drawn from ``rng`` rather than passing the generator
    itself: scipy would spawn from the generator's seed sequence, whose spawn
    counter is not part of the generator state.
    """
    engine = qmc.Sobol(d=dim, scramble=True, seed=int(rng.integers(2**63)))
    m = max(0, math.ceil(math.log2(max(n, 1))))
    return engine.random_base2(m)[:n]


def perturbation_probability(dim: int) -> float:
    return min(20.0 / dim, 1.0)


def generate_candidates(
    state: TrustRegionState, lengthscales, k: int, rng: np.random.Generator
) -> np.ndarray:
    """``k`` candidates in the region: Sobol points that replace each centre
    coordinate with probability ``min(20/D, 1)``, at least one per candidate."""
    if state.center is None:
        raise ValueError("trust region has no centre")
    lb, ub = bounds(state, lengthscales)
    d = state.dim
    pert = lb + (ub - lb) * sobol_points(k, d, rng)
    p = perturbation_probability(d)
    mask = rng.random((k, d)) <= p
    empty = ~mask.any(axis=1)
    if empty.any():
        mask[np.flatnonzero(empty), rng.integers(0, d, size=int(empty.sum()))] = True
    cand = np.tile(state.center, (k, 1))
    cand[mask] = pert[mask]
    return cand
