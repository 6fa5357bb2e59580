"""Benchmark black-box functions on box domains with budget-accounted evaluation.

The catalogue holds clean, unrotated analogues of the noiseless BBOB suite.
Every formula is written in terms of ``z = x - shift`` and accepts a batch of
points with shape ``(..., D)``. Optima sit at ``z = 0`` except for
``rosenbrock`` (``z = 1``) and ``linear-slope`` (the upper corner
``z = 5``); :attr:`ObjectiveFunction.optimum_location` always reports the
true minimiser.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .exceptions import BudgetExhausted, DimensionMismatch, OutOfDomain


@dataclass(frozen=True)
class Domain:
    """Axis-aligned box ``[lower, upper]`` in ``R^D``."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise DimensionMismatch("lower and upper must be vectors of equal length")
        lower.setflags(write=False)
        upper.setflags(write=False)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def box(cls, dim: int, low: float = -5.0, high: float = 5.0) -> "Domain":
        return cls(np.full(dim, low), np.full(dim, high))

    @property
    def dim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def to_unit(self, x) -> np.ndarray:
        """Map physical points to the unit cube (zero-width axes map to 0)."""
        x = np.asarray(x, dtype=float)
        w = self.width
        safe = np.where(w > 0, w, 1.0)
        return (x - self.lower) / safe

    def from_unit(self, u) -> np.ndarray:
        """Map unit-cube points to the domain, clipping rounding overshoot."""
        u = np.asarray(u, dtype=float)
        return np.clip(self.lower + u * self.width, self.lower, self.upper)


def sample_uniform(domain: Domain, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. uniform points from ``domain`` as an ``(n, D)`` array."""
    if n < 1:
        raise ValueError("n must be at least 1")
    u = rng.random((n, domain.dim))
    return domain.from_unit(u)


# --------------------------------------------------------------------------
# Catalogue formulas
# --------------------------------------------------------------------------

def _index_ratio(dim: int) -> np.ndarray:
    """i / (D - 1) for i = 0..D-1 (all ones when D == 1)."""
    if dim == 1:
        return np.ones(1)
    return np.arange(dim) / (dim - 1)


def _conditioning(dim: int, alpha: float) -> np.ndarray:
    return alpha ** (0.5 * _index_ratio(dim))


def _sphere(z):
    return np.sum(z**2, axis=-1)


def _ellipsoid(z):
    w = 10.0 ** (6.0 * _index_ratio(z.shape[-1]))
    return np.sum(w * z**2, axis=-1)


def _rastrigin(z):
    d = z.shape[-1]
    return 10.0 * d + np.sum(z**2 - 10.0 * np.cos(2.0 * np.pi * z), axis=-1)


def _buche_rastrigin(z):
    d = z.shape[-1]
    s = _conditioning(d, 10.0) * np.ones_like(z)
    odd = (np.arange(d) % 2 == 0) & (z > 0)  # 1-based odd indices
    s = np.where(odd, 10.0 * s, s)
    y = s * z
    return 10.0 * d + np.sum(y**2 - 10.0 * np.cos(2.0 * np.pi * y), axis=-1)


def _linear_slope(z):
    d = z.shape[-1]
    s = 10.0 ** _index_ratio(d)
    return np.sum(s * (5.0 - np.minimum(z, 5.0)), axis=-1)


def _attractive_sector(z):
    y = _conditioning(z.shape[-1], 10.0) * z
    s = np.where(y > 0, 100.0, 1.0)
    return np.sum((s * y) ** 2, axis=-1) ** 0.9


def _step_ellipsoid(z):
    d = z.shape[-1]
    zhat = _conditioning(d, 10.0) * z
    ztil = np.where(np.abs(zhat) > 0.5, np.floor(0.5 + zhat), np.floor(0.5 + 10.0 * zhat) / 10.0)
    w = 100.0 * 10.0 ** (2.0 * _index_ratio(d))
    return 0.1 * np.maximum(np.abs(zhat[..., 0]) / 1e4, np.sum(w * ztil**2, axis=-1))


def _rosenbrock(z):
    a, b = z[..., :-1], z[..., 1:]
    return np.sum(100.0 * (b - a**2) ** 2 + (1.0 - a) ** 2, axis=-1)


def _discus(z):
    return 1e6 * z[..., 0] ** 2 + np.sum(z[..., 1:] ** 2, axis=-1)


def _bent_cigar(z):
    return z[..., 0] ** 2 + 1e6 * np.sum(z[..., 1:] ** 2, axis=-1)


def _sharp_ridge(z):
    y = _conditioning(z.shape[-1], 10.0) * z
    return y[..., 0] ** 2 + 100.0 * np.sqrt(np.sum(y[..., 1:] ** 2, axis=-1))


def _different_powers(z):
    p = 2.0 + 4.0 * _index_ratio(z.shape[-1])
    return np.sqrt(np.sum(np.abs(z) ** p, axis=-1))


def _ackley(z):
    d = z.shape[-1]
    a = -20.0 * np.exp(-0.2 * np.sqrt(np.sum(z**2, axis=-1) / d))
    b = -np.exp(np.sum(np.cos(2.0 * np.pi * z), axis=-1) / d)
    return a + b + 20.0 + np.e


_WEIERSTRASS_K = np.arange(12)
_WEIERSTRASS_F0 = float(np.sum(0.5**_WEIERSTRASS_K * np.cos(np.pi * 3.0**_WEIERSTRASS_K)))


def _weierstrass(z):
    d = z.shape[-1]
    k = _WEIERSTRASS_K
    terms = 0.5**k * np.cos(2.0 * np.pi * 3.0**k * (z[..., None] + 0.5))
    inner = np.sum(terms, axis=(-1, -2)) / d - _WEIERSTRASS_F0
    # clamp tiny negative rounding so the minimum is exactly representable
    return 10.0 * np.maximum(inner, 0.0) ** 3


def _schaffers(z, alpha):
    y = _conditioning(z.shape[-1], alpha) * z
    s = np.sqrt(y[..., :-1] ** 2 + y[..., 1:] ** 2)
    inner = np.sqrt(s) + np.sqrt(s) * np.sin(50.0 * s**0.2) ** 2
    return np.mean(inner, axis=-1) ** 2


def _griewank_rosenbrock(z):
    d = z.shape[-1]
    y = max(1.0, np.sqrt(d) / 8.0) * z + 1.0
    s = 100.0 * (y[..., :-1] ** 2 - y[..., 1:]) ** 2 + (y[..., :-1] - 1.0) ** 2
    return 10.0 * np.mean(s / 4000.0 - np.cos(s), axis=-1) + 10.0


def _katsuura(z):
    d = z.shape[-1]
    y = _conditioning(d, 100.0) * z
    j = 2.0 ** np.arange(1, 33)
    scaled = y[..., None] * j
    frac = np.sum(np.abs(scaled - np.round(scaled)) / j, axis=-1)
    idx = np.arange(1, d + 1)
    prod = np.prod((1.0 + idx * frac) ** (10.0 / d**1.2), axis=-1)
    return 10.0 / d**2 * prod - 10.0 / d**2


_LUNACEK_MU0 = 2.5


def _lunacek(z):
    d = z.shape[-1]
    mu0 = _LUNACEK_MU0
    s = 1.0 - 1.0 / (2.0 * np.sqrt(d + 20.0) - 8.2)
    mu1 = -np.sqrt((mu0**2 - 1.0) / s)
    xh = 2.0 * z + mu0
    first = np.sum((xh - mu0) ** 2, axis=-1)
    second = d + s * np.sum((xh - mu1) ** 2, axis=-1)
    return np.minimum(first, second) + 10.0 * (d - np.sum(np.cos(2.0 * np.pi * (xh - mu0)), axis=-1))


class CatalogueEntry(NamedTuple):
    formula: Callable[[np.ndarray], np.ndarray]
    description: str
    min_dim: int = 1
    optimum_offset: float = 0.0  # minimiser sits at shift + optimum_offset
    boundary_optimum: bool = False


_CATALOGUE: dict[str, CatalogueEntry] = {
    "sphere": CatalogueEntry(_sphere, "sum z_i^2; separable, unimodal (F1)"),
    "ellipsoid": CatalogueEntry(_ellipsoid, "sum 10^(6 i/(D-1)) z_i^2; condition 1e6 (F2)"),
    "rastrigin": CatalogueEntry(_rastrigin, "10 D + sum(z_i^2 - 10 cos 2 pi z_i) (F3)"),
    "buche-rastrigin": CatalogueEntry(
        _buche_rastrigin, "Rastrigin on s*z with sqrt(10) conditioning, x10 on positive odd coords (F4)"
    ),
    "linear-slope": CatalogueEntry(
        _linear_slope,
        "sum 10^(i/(D-1)) (5 - min(z_i, 5)); optimum on the upper corner (F5)",
        optimum_offset=5.0,
        boundary_optimum=True,
    ),
    "attractive-sector": CatalogueEntry(
        _attractive_sector, "(sum (s_i y_i)^2)^0.9, s_i = 100 on the positive side (F6)"
    ),
    "step-ellipsoid": CatalogueEntry(_step_ellipsoid, "rounded conditioned ellipsoid with plateaus (F7)"),
    "rosenbrock": CatalogueEntry(
        _rosenbrock, "sum 100 (z_{i+1} - z_i^2)^2 + (1 - z_i)^2; minimiser at z = 1 (F8)",
        min_dim=2, optimum_offset=1.0,
    ),
    "discus": CatalogueEntry(_discus, "1e6 z_1^2 + sum_{i>1} z_i^2 (F11)"),
    "bent-cigar": CatalogueEntry(_bent_cigar, "z_1^2 + 1e6 sum_{i>1} z_i^2 (F12)"),
    "sharp-ridge": CatalogueEntry(_sharp_ridge, "y_1^2 + 100 ||y_{2:D}|| (F13)"),
    "different-powers": CatalogueEntry(_different_powers, "sqrt(sum |z_i|^(2 + 4 i/(D-1))) (F14)"),
    "weierstrass": CatalogueEntry(_weierstrass, "10 (mean_i sum_k 2^-k cos(2 pi 3^k (z_i + 1/2)) - f0)^3 (F16)"),
    "schaffers-f7": CatalogueEntry(
        lambda z: _schaffers(z, 10.0), "Schaffers F7 with sqrt(10) conditioning (F17)", min_dim=2
    ),
    "schaffers-f7-ill": CatalogueEntry(
        lambda z: _schaffers(z, 1000.0), "Schaffers F7 with condition 1000 (F18)", min_dim=2
    ),
    "griewank-rosenbrock": CatalogueEntry(
        _griewank_rosenbrock, "Griewank composite of Rosenbrock terms (F19)", min_dim=2
    ),
    "ackley": CatalogueEntry(_ackley, "Ackley; rugged plateau with a central funnel"),
    "katsuura": CatalogueEntry(_katsuura, "Katsuura product of fractal sums; highly rugged (F23)"),
    "lunacek-bi-rastrigin": CatalogueEntry(
        _lunacek, "double-funnel Rastrigin, funnels at z = 0 and z ~ -2.4 (F24)"
    ),
}


def catalogue() -> list[str]:
    """Identifiers of all available benchmark functions."""
    return list(_CATALOGUE)


def describe(function_id: str) -> str:
    return _lookup(function_id).description


def _lookup(function_id: str) -> CatalogueEntry:
    try:
        return _CATALOGUE[function_id]
    except KeyError:
        raise KeyError(f"unknown function {function_id!r}; choose from {catalogue()}") from None


@dataclass(frozen=True)
class ObjectiveFunction:
    """A noiseless catalogue function on a box domain.

    ``f(x) = formula(x - shift) + f_offset``; the value at
    :attr:`optimum_location` is exactly ``f_offset``.
    """

    id: str
    domain: Domain
    shift: np.ndarray | None = None
    f_offset: float = 0.0

    def __post_init__(self):
        entry = _lookup(self.id)
        if self.domain.dim < entry.min_dim:
            raise DimensionMismatch(f"{self.id} needs at least {entry.min_dim} dimensions")
        shift = np.zeros(self.domain.dim) if self.shift is None else np.asarray(self.shift, dtype=float)
        if shift.shape != (self.domain.dim,):
            raise DimensionMismatch("shift must have one entry per dimension")
        shift = shift.copy()
        shift.setflags(write=False)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def create(cls, function_id: str, dim: int, shift=None, f_offset: float = 0.0,
               low: float = -5.0, high: float = 5.0) -> "ObjectiveFunction":
        return cls(function_id, Domain.box(dim, low, high), shift, f_offset)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def optimum_location(self) -> np.ndarray:
        return self.shift + _lookup(self.id).optimum_offset

    @property
    def known_optimum_value(self) -> float:
        return float(self.f_offset)

    @property
    def boundary_optimum(self) -> bool:
        return _lookup(self.id).boundary_optimum

    def __call__(self, x) -> np.ndarray | float:
        """Evaluate without budget accounting; accepts ``(D,)`` or ``(..., D)``."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected {self.dim} coordinates, got {x.shape[-1]}")
        out = _lookup(self.id).formula(x - self.shift) + self.f_offset
        return float(out) if np.ndim(out) == 0 else out


class Evaluation(NamedTuple):
    index: int
    x: np.ndarray
    value: float


def format_log_line(index: int, function_id: str, x, value: float) -> str:
    """One audit-log line: ``eval_index,function_id,dim,x_1,...,x_D,f_value``."""
    coords = ",".join(f"{v:.17g}" for v in x)
    return f"{index},{function_id},{len(x)},{coords},{value:.17g}"


@dataclass
class BudgetedEvaluator:
    """Counts evaluations against a hard budget and keeps an audit log.

    If ``stream`` is given (any text file object), every evaluation is also
    written to it in audit-log line format as it happens.
    """

    objective: ObjectiveFunction
    max_evals: int
    stream: io.TextIOBase | None = None
    used: int = 0
    log: list[Evaluation] = field(default_factory=list)

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("max_evals must be positive")

    @property
    def remaining(self) -> int:
        return self.max_evals - self.used

    def evaluate(self, x) -> float:
        x = np.array(x, dtype=float)
        if x.shape != (self.objective.dim,):
            raise DimensionMismatch(f"expected a vector of length {self.objective.dim}")
        if self.used >= self.max_evals:
            raise BudgetExhausted(f"budget of {self.max_evals} evaluations exhausted")
        if not self.objective.domain.contains(x):
            raise OutOfDomain(f"point {x} outside the domain")
        value = float(self.objective(x))
        rec = Evaluation(self.used, x, value)
        self.log.append(rec)
        self.used += 1
        if self.stream is not None:
            self.stream.write(format_log_line(rec.index, self.objective.id, x, value) + "\n")
        return value

    __call__ = evaluate

    def evaluate_batch(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if len(X) > self.remaining:
            raise BudgetExhausted(f"batch of {len(X)} exceeds remaining budget {self.remaining}")
        return np.array([self.evaluate(x) for x in X])

    def write_log(self, fh) -> None:
        for rec in self.log:
            fh.write(format_log_line(rec.index, self.objective.id, rec.x, rec.value) + "\n")


def evaluate(evaluator: BudgetedEvaluator, x) -> float:
    return evaluator.evaluate(x)
