"""Closed-form global minimizer of the regularized smoothed-label risk.

The minimizer is a simplex ETF: W and the class-mean feature matrix are
both proportional to P (K I - 11^T) for a partial orthogonal P, with a
logit scale that shrinks as smoothing or regularization grows and hits
zero once sqrt(KN) * lambda_z + delta >= 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import ProblemConfig
from .core import ModelState, one_hot_labels, softmax_cols


def logit_scale(cfg: ProblemConfig) -> float:
    """Optimal logit scale a(delta); zero in the over-regularized regime."""
    s = math.sqrt(cfg.K * cfg.N) * cfg.lambda_z + cfg.delta
    if s >= 1.0:
        return 0.0
    return math.log(cfg.K / s - cfg.K + 1.0) / cfg.K


def class_probabilities(cfg: ProblemConfig) -> tuple[float, float]:
    """Optimal predicted probabilities (p_t, p_n) for target / non-target."""
    a = logit_scale(cfg)
    e = math.exp(a * cfg.K)
    denom = cfg.K - 1.0 + e
    return e / denom, 1.0 / denom


def partial_orthogonal(d: int, K: int, seed: int | None = None) -> np.ndarray:
    """d x K matrix P with P^T P = I.

    Without a seed this is the first K columns of the identity; with a
    seed, the orthonormalization of a seeded Gaussian matrix.
    """
    if d < K:
        raise ValueError(f"need d >= K, got d={d}, K={K}")
    if seed is None:
        return np.eye(d, K)
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((d, K)))
    # fix signs so the factorization is unique per seed
    return Q * np.sign(np.diag(R))


def simplex_etf_core(K: int) -> np.ndarray:
    """K I - 11^T, the unnormalized simplex ETF generator."""
    return K * np.eye(K) - np.ones((K, K))


def mean_logit_matrix(cfg: ProblemConfig) -> np.ndarray:
    """Optimal class-mean logit matrix a * (K I - 11^T)."""
    return logit_scale(cfg) * simplex_etf_core(cfg.K)


@dataclass(frozen=True)
class SimplexETFFactors:
    """Building blocks of the closed-form minimizer."""

    P: np.ndarray
    a_delta: float
    p_t: float
    p_n: float


def etf_factors(cfg: ProblemConfig, seed: int | None = None) -> SimplexETFFactors:
    p_t, p_n = class_probabilities(cfg)
    return SimplexETFFactors(
        P=partial_orthogonal(cfg.d, cfg.K, seed),
        a_delta=logit_scale(cfg),
        p_t=p_t,
        p_n=p_n,
    )


def minimizer_scales(cfg: ProblemConfig) -> tuple[float, float]:
    """Scalar prefactors (c_w, c_h) of W and the class-mean matrix.

    W = c_w * P (K I - 11^T) and Hbar = c_h * P (K I - 11^T), chosen so
    that W^T Hbar reproduces the optimal mean logit matrix and
    W = sqrt(n lambda_h / lambda_w) * Hbar (self-duality).
    """
    a = logit_scale(cfg)
    ratio = (cfg.n * cfg.lambda_h / cfg.lambda_w) ** 0.25
    base = math.sqrt(a / cfg.K)
    return ratio * base, base / ratio


def class_mean_matrix(cfg: ProblemConfig, P: np.ndarray | None = None) -> np.ndarray:
    """Optimal centered class-mean feature matrix Hbar (d x K)."""
    if P is None:
        P = partial_orthogonal(cfg.d, cfg.K)
    _, c_h = minimizer_scales(cfg)
    return c_h * P @ simplex_etf_core(cfg.K)


def global_minimizer(cfg: ProblemConfig, P: np.ndarray | None = None) -> ModelState:
    """Closed-form global minimizer (W, H, b) with H = Hbar Y and b = 0."""
    if P is None:
        P = partial_orthogonal(cfg.d, cfg.K)
    if P.shape != (cfg.d, cfg.K):
        raise ValueError(f"P has shape {P.shape}, expected {(cfg.d, cfg.K)}")
    if not np.allclose(P.T @ P, np.eye(cfg.K), atol=1e-10):
        raise ValueError("P is not partial orthogonal")
    c_w, c_h = minimizer_scales(cfg)
    core = P @ simplex_etf_core(cfg.K)
    W = c_w * core
    H = (c_h * core) @ one_hot_labels(cfg.K, cfg.n)
    return ModelState(W=W, H=H, b=np.zeros(cfg.K))


def optimal_loss(cfg: ProblemConfig) -> float:
    """Loss value at the closed-form minimizer."""
    from .core import ufm_loss

    return ufm_loss(global_minimizer(cfg), cfg)


def solve_logit_scale_by_bisection(cfg: ProblemConfig, tol: float = 1e-14) -> float:
    """Independent check of logit_scale via the scalar optimality equation.

    Solves K / (K - 1 + e^{aK}) - delta = sqrt(NK) * lambda_z for a >= 0
    by bisection; returns 0 when no positive root exists.
    """
    K = cfg.K
    rhs = math.sqrt(cfg.N * K) * cfg.lambda_z

    def f(a):
        return K / (K - 1.0 + math.exp(a * K)) - cfg.delta - rhs

    if f(0.0) <= 0.0:
        return 0.0
    lo, hi = 0.0, 1.0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("bisection bracket failed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def softmax_check(cfg: ProblemConfig) -> np.ndarray:
    """Softmax of the optimal mean logit columns (columns are pbar_k)."""
    return softmax_cols(mean_logit_matrix(cfg))
