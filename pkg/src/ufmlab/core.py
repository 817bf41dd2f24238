"""Smoothed-label risk of the unconstrained feature model and its gradients.

Matrix conventions: the classifier W is d x K, the feature matrix H is
d x N with column (k*n + i) holding sample i of class k (classes are
0-based), and the bias b is a K-vector.  Labels are stored one-hot as a
K x N matrix Y.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ProblemConfig

# Stand-in for an infinite cross-entropy term (exact zero probability
# against a positive target).
SATURATION_VALUE = 1e30


@dataclass
class ModelState:
    """Optimization variables (W: d x K, H: d x N, b: K)."""

    W: np.ndarray
    H: np.ndarray
    b: np.ndarray

    def copy(self) -> "ModelState":
        return ModelState(self.W.copy(), self.H.copy(), self.b.copy())

    def check_shapes(self, cfg: ProblemConfig):
        d, K, N = cfg.d, cfg.K, cfg.N
        if self.W.shape != (d, K):
            raise ValueError(f"W has shape {self.W.shape}, expected {(d, K)}")
        if self.H.shape != (d, N):
            raise ValueError(f"H has shape {self.H.shape}, expected {(d, N)}")
        if self.b.shape != (K,):
            raise ValueError(f"b has shape {self.b.shape}, expected {(K,)}")

    def logits(self) -> np.ndarray:
        """Z = W^T H + b 1^T, shape K x N."""
        return self.W.T @ self.H + self.b[:, None]


def softmax_cols(Z: np.ndarray) -> np.ndarray:
    """Column-wise softmax with per-column max subtraction."""
    Z = np.asarray(Z, dtype=float)
    if not np.all(np.isfinite(Z)):
        raise ValueError("softmax_cols: input contains non-finite entries")
    shifted = Z - Z.max(axis=0, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=0, keepdims=True)


def one_hot_labels(K: int, n: int) -> np.ndarray:
    """Class-major one-hot label matrix Y (K x nK)."""
    labels = np.repeat(np.arange(K), n)
    Y = np.zeros((K, K * n))
    Y[labels, np.arange(K * n)] = 1.0
    return Y


def smooth_labels(Y: np.ndarray, delta: float) -> np.ndarray:
    """Smoothed targets (1 - delta) * Y + delta / K."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must be in [0, 1], got {delta}")
    K = Y.shape[0]
    return (1.0 - delta) * Y + delta / K


def log_softmax_cols(Z: np.ndarray) -> np.ndarray:
    shifted = Z - Z.max(axis=0, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=0, keepdims=True))


def cross_entropy_cols(Z: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Per-column cross entropy of softmax(Z) against target columns T."""
    return (T * -log_softmax_cols(Z)).sum(axis=0)


def ufm_loss(state: ModelState, cfg: ProblemConfig) -> float:
    """Regularized smoothed-label risk L(W, H, b)."""
    state.check_shapes(cfg)
    Y = one_hot_labels(cfg.K, cfg.n)
    Yd = smooth_labels(Y, cfg.delta)
    ce = cross_entropy_cols(state.logits(), Yd).sum() / cfg.N
    reg = (
        0.5 * cfg.lambda_w * np.sum(state.W**2)
        + 0.5 * cfg.lambda_h * np.sum(state.H**2)
        + 0.5 * cfg.lambda_b * np.sum(state.b**2)
    )
    return float(ce + reg)


def ufm_gradient(state: ModelState, cfg: ProblemConfig):
    """Exact gradient blocks (G_W, G_H, g_b) of ufm_loss."""
    state.check_shapes(cfg)
    Y = one_hot_labels(cfg.K, cfg.n)
    Yd = smooth_labels(Y, cfg.delta)
    P = softmax_cols(state.logits())
    dZ = (P - Yd) / cfg.N
    G_W = state.H @ dZ.T + cfg.lambda_w * state.W
    G_H = state.W @ dZ + cfg.lambda_h * state.H
    g_b = dZ.sum(axis=1) + cfg.lambda_b * state.b
    return G_W, G_H, g_b


def gradient_norm(state: ModelState, cfg: ProblemConfig) -> float:
    G_W, G_H, g_b = ufm_gradient(state, cfg)
    return float(np.sqrt(np.sum(G_W**2) + np.sum(G_H**2) + np.sum(g_b**2)))


def _smoothed_ce(p: np.ndarray, target: int, delta: float) -> tuple[float, bool]:
    """Cross entropy of p against the delta-smoothed one-hot target.

    Returns (value, saturated); zero probabilities against a positive
    target saturate at SATURATION_VALUE instead of producing inf.
    """
    K = p.shape[0]
    t = np.full(K, delta / K)
    t[target] += 1.0 - delta
    saturated = bool(np.any((p <= 0.0) & (t > 0.0)))
    if saturated:
        return SATURATION_VALUE, True
    with np.errstate(divide="ignore"):
        return float(-(t * np.log(p)).sum()), False


def ls_equalization_gap(
    p: np.ndarray, target: int, delta: float, with_flag: bool = False
):
    """Excess smoothed-label loss of p over its non-target-equalized version.

    The comparison point keeps p[target] and spreads the remaining mass
    uniformly over the other classes; by Jensen the gap is nonnegative and
    vanishes exactly when the non-target entries are already equal.
    """
    p = np.asarray(p, dtype=float)
    K = p.shape[0]
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must be in (0, 1), got {delta}")
    if not (0 <= target < K):
        raise ValueError(f"target {target} out of range for K={K}")
    if abs(p.sum() - 1.0) > 1e-9 or np.any(p < -1e-12):
        raise ValueError("p must be a probability vector")

    p_eq = np.full(K, (1.0 - p[target]) / (K - 1))
    p_eq[target] = p[target]

    loss_p, sat_p = _smoothed_ce(p, target, delta)
    loss_eq, sat_eq = _smoothed_ce(p_eq, target, delta)
    if sat_p or sat_eq:
        gap = SATURATION_VALUE if sat_p and not sat_eq else loss_p - loss_eq
        flag = True
    else:
        gap = loss_p - loss_eq
        flag = False
    if with_flag:
        return gap, flag
    return gap
