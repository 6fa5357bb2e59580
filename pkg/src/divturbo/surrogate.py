"""Gaussian-process surrogate: ARD Matern-5/2 kernel, marginal-likelihood fitting
and Thompson-sampling batch selection over a finite candidate set.

Inputs are expected in the unit cube. Targets are standardised internally and
all public outputs are on the original scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, lapack, solve_triangular
from scipy.optimize import minimize

from .exceptions import SingularKernel

LENGTHSCALE_BOUNDS = (0.005, 2.0)
SIGNAL_VARIANCE_BOUNDS = (0.05, 20.0)
NOISE_VARIANCE_BOUNDS = (5e-4, 0.2)

JITTER_START = 1e-8
JITTER_MAX = 1e-4
_SQRT5 = math.sqrt(5.0)


@dataclass(frozen=True)
class GpHyperparams:
    lengthscales: np.ndarray
    signal_variance: float
    noise_variance: float

    def __post_init__(self):
        ls = np.atleast_1d(np.asarray(self.lengthscales, dtype=float)).copy()
        ls.setflags(write=False)
        object.__setattr__(self, "lengthscales", ls)

    @classmethod
    def default(cls, dim: int) -> "GpHyperparams":
        return cls(np.full(dim, 0.5), 1.0, 0.005)

    def to_vector(self) -> np.ndarray:
        """Log-parameter vector ``[log l_1..l_D, log signal, log noise]``."""
        return np.log(np.concatenate([self.lengthscales, [self.signal_variance, self.noise_variance]]))

    @classmethod
    def from_vector(cls, theta) -> "GpHyperparams":
        p = np.exp(np.asarray(theta, dtype=float))
        return cls(p[:-2], float(p[-2]), float(p[-1]))

    def clipped(self) -> "GpHyperparams":
        return GpHyperparams(
            np.clip(self.lengthscales, *LENGTHSCALE_BOUNDS),
            float(np.clip(self.signal_variance, *SIGNAL_VARIANCE_BOUNDS)),
            float(np.clip(self.noise_variance, *NOISE_VARIANCE_BOUNDS)),
        )


def log_bounds(dim: int) -> list[tuple[float, float]]:
    b = [LENGTHSCALE_BOUNDS] * dim + [SIGNAL_VARIANCE_BOUNDS, NOISE_VARIANCE_BOUNDS]
    return [(math.log(lo), math.log(hi)) for lo, hi in b]


def _scaled_sqdist(A, B, lengthscales):
    a = A / lengthscales
    b = B / lengthscales
    d2 = np.sum(a**2, 1)[:, None] + np.sum(b**2, 1)[None, :] - 2.0 * a @ b.T
    return np.maximum(d2, 0.0)


def matern52(A, B, lengthscales, signal_variance) -> np.ndarray:
    """ARD Matern-5/2 covariance between the rows of ``A`` and ``B``."""
    r = np.sqrt(_scaled_sqdist(np.atleast_2d(A), np.atleast_2d(B), lengthscales))
    return signal_variance * (1.0 + _SQRT5 * r + 5.0 / 3.0 * r**2) * np.exp(-_SQRT5 * r)


def _cholesky_with_jitter(K: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky factor of ``K``, adding diagonal jitter 1e-8 .. 1e-4 on failure."""
    L, info = lapack.dpotrf(K, lower=1, clean=1)
    if info == 0:
        return L, 0.0
    jitter = JITTER_START
    n = len(K)
    while jitter <= JITTER_MAX * (1 + 1e-9):
        Kj = K.copy()
        Kj[np.diag_indices(n)] += jitter
        L, info = lapack.dpotrf(Kj, lower=1, clean=1)
        if info == 0:
            return L, jitter
        jitter *= 10.0
    raise SingularKernel(f"Cholesky failed with jitter up to {JITTER_MAX:g}")


def _inverse_from_cholesky(L: np.ndarray) -> np.ndarray:
    inv, info = lapack.dpotri(L, lower=1)
    if info != 0:
        raise SingularKernel("inverse from Cholesky factor failed")
    return np.tril(inv) + np.tril(inv, -1).T


def neg_log_marginal_likelihood(theta, X, y) -> tuple[float, np.ndarray]:
    """Negative log marginal likelihood and its gradient in log-parameter space.

    ``theta = [log l_1..l_D, log signal_variance, log noise_variance]``.
    """
    n, d = X.shape
    ls = np.exp(theta[:d])
    sf2 = math.exp(theta[d])
    sn2 = math.exp(theta[d + 1])

    r = np.sqrt(_scaled_sqdist(X, X, ls))
    e = np.exp(-_SQRT5 * r)
    Kf = sf2 * (1.0 + _SQRT5 * r + 5.0 / 3.0 * r**2) * e
    L, _ = _cholesky_with_jitter(Kf + sn2 * np.eye(n))
    alpha = cho_solve((L, True), y)

    nll = 0.5 * y @ alpha + np.sum(np.log(np.diag(L))) + 0.5 * n * math.log(2.0 * math.pi)

    Kinv = _inverse_from_cholesky(L)
    W = np.outer(alpha, alpha) - Kinv  # dL/dK = W / 2
    # dK/dlog(l_d) = C * (x_id - x_jd)^2 / l_d^2
    C = sf2 * (5.0 / 3.0) * (1.0 + _SQRT5 * r) * e
    M = W * C
    Xs = X / ls
    rowsum = M.sum(axis=1)
    quad = 2.0 * (rowsum @ Xs**2) - 2.0 * np.sum((M @ Xs) * Xs, axis=0)
    grad = np.empty(d + 2)
    grad[:d] = 0.5 * quad
    grad[d] = 0.5 * np.sum(W * Kf)
    grad[d + 1] = 0.5 * sn2 * np.trace(W)
    return float(nll), -grad


@dataclass(frozen=True)
class GpModel:
    """Fitted GP posterior over unit-cube inputs."""

    train_x: np.ndarray
    train_y_standardized: np.ndarray
    y_mean: float
    y_std: float
    hyper: GpHyperparams
    chol_factor: np.ndarray
    alpha: np.ndarray

    @classmethod
    def condition(cls, train_x, train_y, hyper: GpHyperparams) -> "GpModel":
        """Build the posterior for fixed hyperparameters (no fitting)."""
        X = np.atleast_2d(np.asarray(train_x, dtype=float))
        y = np.asarray(train_y, dtype=float).ravel()
        y_mean, y_std, ys = _standardize(y)
        K = matern52(X, X, hyper.lengthscales, hyper.signal_variance)
        L, _ = _cholesky_with_jitter(K + hyper.noise_variance * np.eye(len(X)))
        alpha = cho_solve((L, True), ys)
        return cls(X, ys, y_mean, y_std, hyper, L, alpha)

    def posterior(self, query_x) -> tuple[np.ndarray, np.ndarray]:
        return posterior(self, query_x)


def _standardize(y: np.ndarray) -> tuple[float, float, np.ndarray]:
    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    if y_std < 1e-12:
        return y_mean, 1.0, y - y_mean
    return y_mean, y_std, (y - y_mean) / y_std


def fit(
    train_x,
    train_y,
    prior_hyper: GpHyperparams | None = None,
    rng: np.random.Generator | None = None,
    n_restarts: int = 3,
    maxiter: int = 50,
) -> GpModel:
    """Fit hyperparameters by multi-start L-BFGS-B on the log marginal likelihood.

    The first start is ``prior_hyper`` (or a fixed default); the remaining
    ``n_restarts - 1`` starts are drawn uniformly in log-bound space from
    ``rng``.
    """
    X = np.atleast_2d(np.asarray(train_x, dtype=float))
    y = np.asarray(train_y, dtype=float).ravel()
    if len(X) < 2:
        raise ValueError("need at least two training points")
    if not np.all(np.isfinite(y)):
        raise ValueError("training targets must be finite")
    if rng is None:
        rng = np.random.default_rng(0)
    d = X.shape[1]
    _, _, ys = _standardize(y)

    bounds = log_bounds(d)
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    first = (prior_hyper or GpHyperparams.default(d)).clipped().to_vector()
    starts = [first] + [lo + rng.random(d + 2) * (hi - lo) for _ in range(n_restarts - 1)]

    best_theta, best_val = first, math.inf
    for theta0 in starts:
        try:
            res = minimize(
                neg_log_marginal_likelihood, theta0, args=(X, ys), jac=True,
                method="L-BFGS-B", bounds=bounds, options={"maxiter": maxiter},
            )
        except SingularKernel:
            continue
        if np.isfinite(res.fun) and res.fun < best_val:
            best_theta, best_val = np.clip(res.x, lo, hi), res.fun
    hyper = GpHyperparams.from_vector(best_theta)
    return GpModel.condition(X, y, hyper)


def posterior(model: GpModel, query_x) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and latent variance at ``query_x``, de-standardised."""
    Q = np.atleast_2d(np.asarray(query_x, dtype=float))
    h = model.hyper
    Ks = matern52(Q, model.train_x, h.lengthscales, h.signal_variance)
    mean = Ks @ model.alpha
    v = solve_triangular(model.chol_factor, Ks.T, lower=True)
    var = h.signal_variance - np.sum(v**2, axis=0)
    var = _clamp_variance(var)
    return mean * model.y_std + model.y_mean, var * model.y_std**2


def _clamp_variance(var: np.ndarray) -> np.ndarray:
    if np.any(var < -1e-9):
        raise FloatingPointError(f"posterior variance {var.min():.3e} is negative beyond tolerance")
    return np.maximum(var, 0.0)


def posterior_covariance(model: GpModel, query_x) -> tuple[np.ndarray, np.ndarray]:
    """Joint posterior mean and full covariance (standardised scale)."""
    Q = np.atleast_2d(np.asarray(query_x, dtype=float))
    h = model.hyper
    Ks = matern52(Q, model.train_x, h.lengthscales, h.signal_variance)
    mean = Ks @ model.alpha
    v = solve_triangular(model.chol_factor, Ks.T, lower=True)
    cov = matern52(Q, Q, h.lengthscales, h.signal_variance) - v.T @ v
    return mean, 0.5 * (cov + cov.T)


def sample_paths(model: GpModel, candidates, n_paths: int, rng: np.random.Generator) -> np.ndarray:
    """Joint posterior draws over ``candidates``; shape ``(n_paths, k)``, original scale."""
    mean, cov = posterior_covariance(model, candidates)
    L, _ = _cholesky_with_jitter(cov)
    z = rng.standard_normal((len(mean), n_paths))
    f = mean[:, None] + L @ z
    return (f * model.y_std + model.y_mean).T


def thompson_select(model: GpModel, candidates, n_batch: int, rng: np.random.Generator) -> np.ndarray:
    """Indices of ``n_batch`` distinct candidates chosen by Thompson sampling.

    Path ``j`` contributes its minimiser; if that candidate was already taken
    by an earlier path, the path's next-best unchosen candidate is used.
    """
    candidates = np.atleast_2d(candidates)
    k = len(candidates)
    if n_batch > k:
        raise ValueError(f"cannot select {n_batch} from {k} candidates")
    paths = sample_paths(model, candidates, n_batch, rng)
    chosen: list[int] = []
    taken = np.zeros(k, dtype=bool)
    for path in paths:
        for idx in np.argsort(path, kind="stable"):
            if not taken[idx]:
                taken[idx] = True
                chosen.append(int(idx))
                break
    return np.array(chosen, dtype=int)
