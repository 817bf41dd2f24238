"""Shared independent oracles for the test suite."""

import numpy as np

from ufmlab.config import ProblemConfig
from ufmlab.core import ModelState, ufm_loss


def pack(state: ModelState) -> np.ndarray:
    return np.concatenate([state.W.ravel(), state.H.ravel(), state.b])


def unpack(x: np.ndarray, cfg: ProblemConfig) -> ModelState:
    d, K, N = cfg.d, cfg.K, cfg.N
    W = x[: d * K].reshape(d, K)
    H = x[d * K : d * K + d * N].reshape(d, N)
    b = x[d * K + d * N :]
    return ModelState(W.copy(), H.copy(), b.copy())


def fd_gradient(cfg: ProblemConfig, state: ModelState, step: float = 1e-5) -> np.ndarray:
    """Central finite differences of ufm_loss over all parameters."""
    x0 = pack(state)
    g = np.zeros_like(x0)
    for i in range(len(x0)):
        xp, xm = x0.copy(), x0.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (ufm_loss(unpack(xp, cfg), cfg) - ufm_loss(unpack(xm, cfg), cfg)) / (2 * step)
    return g


def random_state(cfg: ProblemConfig, rng, scale: float = 1.0) -> ModelState:
    return ModelState(
        W=scale * rng.standard_normal((cfg.d, cfg.K)),
        H=scale * rng.standard_normal((cfg.d, cfg.N)),
        b=scale * rng.standard_normal(cfg.K),
    )


def phi_unregularized(state: ModelState, cfg: ProblemConfig) -> float:
    """Cross-entropy part of the loss only (no L2 terms)."""
    reg = (
        0.5 * cfg.lambda_w * np.sum(state.W**2)
        + 0.5 * cfg.lambda_h * np.sum(state.H**2)
        + 0.5 * cfg.lambda_b * np.sum(state.b**2)
    )
    return ufm_loss(state, cfg) - reg
