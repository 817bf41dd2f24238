"""Numerical witnesses for the variational machinery behind the closed form.

Covers the nuclear-norm lower bound for balanced factorizations, the
balanced SVD factorization that attains it, and the self-duality of the
classifier and the class-mean features at the minimizer.
"""

from __future__ import annotations

import numpy as np

from .config import ProblemConfig


def nuclear_norm(Z: np.ndarray) -> float:
    """Sum of singular values."""
    return float(np.linalg.svd(Z, compute_uv=False).sum())


def balanced_factorization(Z: np.ndarray, alpha: float):
    """Factor Z = W^T H with the balance that attains the nuclear norm.

    W = alpha^{1/4} S^{1/2} U^T and H = alpha^{-1/4} S^{1/2} V^T from the
    reduced SVD Z = U S V^T, so (||W||^2 + alpha ||H||^2) / (2 sqrt(alpha))
    equals ||Z||_*.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    root = np.sqrt(s)[:, None]
    W = alpha**0.25 * (root * U.T)
    H = alpha**-0.25 * (root * Vt)
    return W, H


def factorization_gap(W: np.ndarray, H: np.ndarray, alpha: float) -> float:
    """(||W||^2 + alpha ||H||^2) / (2 sqrt(alpha)) - ||W^T H||_*; always >= 0."""
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    bound = (np.sum(W**2) + alpha * np.sum(H**2)) / (2.0 * np.sqrt(alpha))
    return float(bound - nuclear_norm(W.T @ H))


def duality_gap(W: np.ndarray, H_bar: np.ndarray, cfg: ProblemConfig) -> float:
    """|| W - sqrt(n lambda_h / lambda_w) * Hbar ||_F."""
    scale = np.sqrt(cfg.n * cfg.lambda_h / cfg.lambda_w)
    return float(np.linalg.norm(W - scale * H_bar))


def logit_spread(Z: np.ndarray, K: int, n: int) -> float:
    """Max over classes of the within-class spread of logit columns."""
    spread = 0.0
    for k in range(K):
        cols = Z[:, k * n : (k + 1) * n]
        spread = max(spread, float(np.abs(cols - cols.mean(axis=1, keepdims=True)).max()))
    return spread
