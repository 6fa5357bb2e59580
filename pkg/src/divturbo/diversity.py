"""Minimum-distance diversity: tau-filtering, best-diverse selection and the
elite set shared between optimiser runs.

Distances are Euclidean in physical (domain) coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .exceptions import DimensionMismatch, EmptyInput


@dataclass(frozen=True)
class EliteSet:
    """Ordered diverse elites with the threshold ``tau`` that governs them.

    ``flags[i]`` records whether elite ``i`` was chosen through the feasible
    branch of the selection rule. :attr:`is_feasible` checks the pairwise
    distance condition over the whole set.
    """

    tau: float
    points: tuple = ()
    values: tuple = ()
    flags: tuple = ()

    def __post_init__(self):
        if self.tau < 0:
            raise ValueError("tau must be nonnegative")
        pts = tuple(np.array(p, dtype=float) for p in self.points)
        for p in pts:
            p.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        flags = self.flags if self.flags else (True,) * len(pts)
        object.__setattr__(self, "flags", tuple(bool(f) for f in flags))
        if not (len(self.points) == len(self.values) == len(self.flags)):
            raise ValueError("points, values and flags must have equal length")

    def __len__(self) -> int:
        return len(self.points)

    def as_array(self, dim: int | None = None) -> np.ndarray:
        if not self.points:
            return np.empty((0, dim or 0))
        return np.vstack(self.points)

    @property
    def is_feasible(self) -> bool:
        """True when every pair of elites is at least ``tau`` apart."""
        X = self.as_array()
        n = len(X)
        if n < 2:
            return True
        d = np.sqrt(np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1))
        return bool(np.all(d[np.triu_indices(n, 1)] >= self.tau))

    def appended(self, x, value: float, flag: bool = True) -> "EliteSet":
        return EliteSet(self.tau, self.points + (x,), self.values + (value,), self.flags + (flag,))

    def replaced(self, i: int, x, value: float, flag: bool = True) -> "EliteSet":
        pts, vals, fl = list(self.points), list(self.values), list(self.flags)
        pts[i], vals[i], fl[i] = x, value, flag
        return EliteSet(self.tau, tuple(pts), tuple(vals), tuple(fl))

    def without(self, i: int) -> "EliteSet":
        keep = [j for j in range(len(self)) if j != i]
        return EliteSet(
            self.tau,
            tuple(self.points[j] for j in keep),
            tuple(self.values[j] for j in keep),
            tuple(self.flags[j] for j in keep),
        )


class DiverseChoice(NamedTuple):
    x: np.ndarray
    value: float
    feasible: bool
    index: int


def distance(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shapes {x.shape} and {y.shape} differ")
    return float(np.sqrt(np.sum((x - y) ** 2)))


def min_distances(points, elite_set: EliteSet) -> np.ndarray:
    """Distance from each row of ``points`` to its nearest elite (inf if none)."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if len(elite_set) == 0:
        return np.full(len(P), np.inf)
    E = elite_set.as_array()
    if E.shape[1] != P.shape[1]:
        raise DimensionMismatch("points and elites differ in dimension")
    d2 = np.sum((P[:, None, :] - E[None, :, :]) ** 2, axis=-1)
    return np.sqrt(d2.min(axis=1))


def min_distance_to_set(x, elite_set: EliteSet) -> float:
    return float(min_distances(np.atleast_2d(x), elite_set)[0])


def tau_feasible_mask(points, elite_set: EliteSet) -> np.ndarray:
    return min_distances(points, elite_set) >= elite_set.tau


def filter_tau(points, elite_set: EliteSet) -> np.ndarray:
    """Rows of ``points`` at distance >= tau from every elite, in input order."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    return P[tau_feasible_mask(P, elite_set)]


def best_diverse(points, values, elite_set: EliteSet) -> DiverseChoice:
    """Best member of the tau-feasible subset, else the maximin-distance point.

    Rows are assumed to be in evaluation order, so the lowest index wins
    ties. In the fallback branch ties on distance go to the smaller value.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    v = np.asarray(values, dtype=float).ravel()
    if P.shape[0] == 0 or P.size == 0:
        raise EmptyInput("no points to select from")
    if len(v) != len(P):
        raise ValueError("points and values differ in length")
    dmin = min_distances(P, elite_set)
    feasible = dmin >= elite_set.tau
    order = np.arange(len(P))
    if feasible.any():
        idx = np.flatnonzero(feasible)
        i = int(idx[np.lexsort((order[idx], v[idx]))[0]])
        return DiverseChoice(P[i].copy(), float(v[i]), True, i)
    i = int(np.lexsort((order, v, -dmin))[0])
    return DiverseChoice(P[i].copy(), float(v[i]), False, i)


def select_center(tr_points, tr_values, elite_set: EliteSet) -> DiverseChoice:
    """Trust-region centre: the best-diverse rule applied to the region's archive."""
    return best_diverse(tr_points, tr_values, elite_set)
