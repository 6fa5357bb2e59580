"""Rank-based comparison of algorithm results: Kruskal-Wallis omnibus test
followed by Bonferroni-corrected pairwise Mann-Whitney U tests.

Lower values are better (minimisation).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr
from scipy.stats import chi2, rankdata


def _tie_term(ranked_values: np.ndarray) -> float:
    _, counts = np.unique(ranked_values, return_counts=True)
    return float(np.sum(counts.astype(float) ** 3 - counts))


def kruskal_wallis(groups) -> tuple[float, float]:
    """H statistic (tie-corrected) and chi-squared p-value with ``k - 1`` dof.

    All-identical observations give ``H = 0, p = 1``.
    """
    groups = [np.asarray(g, dtype=float).ravel() for g in groups]
    if len(groups) < 2:
        raise ValueError("need at least two groups")
    if any(len(g) < 2 for g in groups):
        raise ValueError("each group needs at least two observations")
    pooled = np.concatenate(groups)
    n = len(pooled)
    ranks = rankdata(pooled)
    correction = 1.0 - _tie_term(pooled) / (n**3 - n)
    if correction <= 0:
        return 0.0, 1.0
    h = 0.0
    start = 0
    for g in groups:
        r = ranks[start:start + len(g)]
        h += r.sum() ** 2 / len(g)
        start += len(g)
    h = (12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)) / correction
    h = max(h, 0.0)
    return float(h), float(chi2.sf(h, len(groups) - 1))


def mann_whitney(a, b) -> tuple[float, float]:
    """Two-sided Mann-Whitney U test, normal approximation with tie and
    continuity correction. Returns ``(U_a, p)`` where ``U_a`` counts pairs in
    which ``a`` exceeds ``b``."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n1, n2 = len(a), len(b)
    pooled = np.concatenate([a, b])
    ranks = rankdata(pooled)
    u1 = ranks[:n1].sum() - n1 * (n1 + 1) / 2.0
    mu = n1 * n2 / 2.0
    n = n1 + n2
    var = n1 * n2 / 12.0 * ((n + 1) - _tie_term(pooled) / (n * (n - 1)))
    if var <= 0:
        return float(u1), 1.0
    z = (abs(u1 - mu) - 0.5) / math.sqrt(var)
    p = 2.0 * ndtr(-max(z, 0.0))
    return float(u1), float(min(p, 1.0))


@dataclass
class PairResult:
    p_raw: float
    p_adjusted: float
    better: str | None  # name of the group with the smaller mean rank, if significant
    significant: bool


@dataclass
class ComparisonResult:
    names: list
    groups: dict
    kw_h: float
    kw_p: float
    alpha: float
    pairwise: dict = field(default_factory=dict)  # (name_a, name_b) -> PairResult

    def label(self, name: str) -> str:
        return str(self.names.index(name) + 1)

    def symbols(self, name: str) -> str:
        """Column annotation for ``name``: ``"2+"`` means it beats method 2,
        ``"2-"`` that method 2 beats it. Methods are numbered from 1 in
        input order."""
        out = []
        for other in self.names:
            if other == name:
                continue
            key = (name, other) if (name, other) in self.pairwise else (other, name)
            res = self.pairwise[key]
            if not res.significant:
                continue
            out.append(self.label(other) + ("+" if res.better == name else "-"))
        return " ".join(out)


def bonferroni(p: float, n_comparisons: int) -> float:
    return min(1.0, p * n_comparisons)


def pairwise_compare(groups, alpha: float = 0.05) -> ComparisonResult:
    """Kruskal-Wallis plus pairwise Mann-Whitney tests with Bonferroni correction.

    ``groups`` maps names to samples (or is a sequence, named "1", "2", ...).
    A pair is significant when the omnibus test rejects at ``alpha`` and the
    adjusted pairwise p-value is below ``alpha``.
    """
    if not isinstance(groups, dict):
        groups = {str(i + 1): g for i, g in enumerate(groups)}
    names = list(groups)
    samples = {k: np.asarray(v, dtype=float).ravel() for k, v in groups.items()}
    h, p = kruskal_wallis([samples[k] for k in names])
    result = ComparisonResult(names, samples, h, p, alpha)
    pairs = list(itertools.combinations(names, 2))
    for a, b in pairs:
        _, p_raw = mann_whitney(samples[a], samples[b])
        p_adj = bonferroni(p_raw, len(pairs))
        pooled_ranks = rankdata(np.concatenate([samples[a], samples[b]]))
        mean_a = pooled_ranks[: len(samples[a])].mean()
        mean_b = pooled_ranks[len(samples[a]):].mean()
        better = a if mean_a < mean_b else b if mean_b < mean_a else None
        significant = bool(p < alpha and p_adj < alpha and better is not None)
        result.pairwise[(a, b)] = PairResult(p_raw, p_adj, better, significant)
    return result
