"""Hessian spectra of the unregularized risk at the global minimizer.

Both partial Hessians (features with W fixed, classifier with H fixed)
have closed-form spectra built from the Laplacian of the optimal
prediction vector; the condition number over the nonzero eigenvalues is
K * p_t for both, which shrinks as the smoothing parameter grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ProblemConfig
from .closed_form import class_probabilities, logit_scale
from .core import ModelState, softmax_cols

# Relative gap used to cluster numerically equal eigenvalues.
CLUSTER_REL_GAP = 1e-8


@dataclass
class SpectrumReport:
    """Eigenvalues with multiplicities, plus the condition number."""

    eigenpairs: list[tuple[float, int]]
    condition_number: float
    source: str
    degenerate: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def ambient_dim(self) -> int:
        return sum(m for _, m in self.eigenpairs)

    def eigenvalues(self) -> np.ndarray:
        """Full eigenvalue list expanded by multiplicity, ascending."""
        vals = np.concatenate([[v] * m for v, m in self.eigenpairs])
        return np.sort(vals)


def probability_laplacian(p: np.ndarray) -> np.ndarray:
    """diag(p) - p p^T for a probability vector p."""
    p = np.asarray(p, dtype=float)
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("p must be a probability vector")
    return np.diag(p) - np.outer(p, p)


def condition_number(report, zero_cutoff: float = 1e-10) -> float:
    """lambda_max / lambda_min over eigenvalues above zero_cutoff * lambda_max."""
    if isinstance(report, SpectrumReport):
        vals = report.eigenvalues()
    else:
        vals = np.sort(np.asarray(report, dtype=float))
    lam_max = vals[-1]
    if lam_max <= 0.0:
        raise ValueError("all-zero spectrum has no condition number")
    nonzero = vals[vals > zero_cutoff * lam_max]
    return float(lam_max / nonzero[0])


def _feature_scale_sq(cfg: ProblemConfig) -> float:
    """s^2 where the implemented W equals s * P * (I - 11^T/K)."""
    a = logit_scale(cfg)
    return cfg.K * a * math.sqrt(cfg.n * cfg.lambda_h / cfg.lambda_w)


def _classifier_scale(cfg: ProblemConfig) -> float:
    """Prefactor of the classifier Hessian spectrum at the minimizer."""
    a = logit_scale(cfg)
    return a * math.sqrt(cfg.lambda_w / (cfg.n * cfg.lambda_h))


def analytic_feature_hessian_spectrum(cfg: ProblemConfig) -> SpectrumReport:
    """Spectrum of one per-sample feature block (1/N) W D W^T (d x d)."""
    p_t, p_n = class_probabilities(cfg)
    s2 = _feature_scale_sq(cfg)
    K, d, N = cfg.K, cfg.d, cfg.N
    pairs = [(0.0, 1 + d - K)]
    if K > 2:
        pairs.append((s2 * p_n / N, K - 2))
    pairs.append((s2 * K * p_t * p_n / N, 1))
    notes = []
    degenerate = False
    if s2 == 0.0:
        kappa = math.nan
        degenerate = True
        notes.append("zero logit scale: all eigenvalues vanish")
    elif K == 2:
        kappa = 1.0
        degenerate = True
        notes.append("K=2: single nonzero eigenvalue, condition number trivially 1")
    else:
        kappa = K * p_t
    return SpectrumReport(pairs, kappa, "analytic", degenerate, notes)


def analytic_classifier_hessian_spectrum(cfg: ProblemConfig) -> SpectrumReport:
    """Spectrum of the full classifier Hessian (Kd x Kd) at the minimizer."""
    K, d = cfg.K, cfg.d
    if K < 3:
        raise ValueError("classifier spectrum requires K >= 3 (K=2 degenerates)")
    p_t, p_n = class_probabilities(cfg)
    c = _classifier_scale(cfg)
    lam_mid = (1.0 - p_t + p_n) * (p_n + (K - 1) * p_t) / K
    pairs = [
        (0.0, 2 * K - 1 + K * (d - K)),
        (c * p_n, K * K - 3 * K + 1),
        (c * lam_mid, K - 1),
        (c * K * p_n * p_t, 1),
    ]
    notes = []
    degenerate = False
    if c == 0.0:
        kappa = math.nan
        degenerate = True
        notes.append("zero logit scale: all eigenvalues vanish")
    else:
        kappa = K * p_t
    return SpectrumReport(pairs, kappa, "analytic", degenerate, notes)


def numeric_hessian_features(
    state: ModelState, cfg: ProblemConfig, include_ridge: bool = False
) -> list[np.ndarray]:
    """One d x d block (1/N) W D_k W^T per class (first sample of each class)."""
    state.check_shapes(cfg)
    P = softmax_cols(state.logits())
    blocks = []
    for k in range(cfg.K):
        p = P[:, k * cfg.n]
        D = probability_laplacian(p)
        block = state.W @ D @ state.W.T / cfg.N
        if include_ridge:
            block = block + cfg.lambda_h * np.eye(cfg.d)
        blocks.append(block)
    return blocks


def numeric_hessian_classifier(
    state: ModelState, cfg: ProblemConfig, include_ridge: bool = False
) -> np.ndarray:
    """Kd x Kd Hessian w.r.t. vec(W) (columns stacked), H fixed."""
    state.check_shapes(cfg)
    P = softmax_cols(state.logits())
    K, d, N = cfg.K, cfg.d, cfg.N
    M = np.zeros((K * d, K * d))
    for j in range(N):
        D = probability_laplacian(P[:, j])
        h = state.H[:, j]
        M += np.kron(D, np.outer(h, h))
    M /= N
    if include_ridge:
        M += cfg.lambda_w * np.eye(K * d)
    return M


def cluster_eigenvalues(
    values: np.ndarray, rel_gap: float = CLUSTER_REL_GAP
) -> list[tuple[float, int]]:
    """Group nearly equal eigenvalues; returns (mean, count) ascending."""
    vals = np.sort(np.asarray(values, dtype=float))
    lam_max = max(abs(vals[0]), abs(vals[-1]))
    if lam_max == 0.0:
        return [(0.0, len(vals))]
    thresh = rel_gap * lam_max
    clusters = []
    start = 0
    for i in range(1, len(vals) + 1):
        if i == len(vals) or vals[i] - vals[i - 1] > thresh:
            group = vals[start:i]
            clusters.append((float(group.mean()), len(group)))
            start = i
    return clusters


def compare_to_analytic(
    analytic: SpectrumReport,
    numeric_values: np.ndarray,
    rel_gap: float = CLUSTER_REL_GAP,
) -> tuple[float, bool]:
    """Cluster numeric eigenvalues and match them against the analytic pairs.

    Returns (max relative deviation, multiplicities matched).  Deviation
    for a zero analytic eigenvalue is measured relative to lambda_max.
    """
    clusters = cluster_eigenvalues(numeric_values, rel_gap)
    pairs = sorted(analytic.eigenpairs)
    lam_max = max(abs(v) for v, _ in pairs)
    if lam_max == 0.0:
        lam_max = max(abs(np.asarray(numeric_values)).max(), 1.0)
    mults_ok = len(clusters) == len(pairs) and all(
        c[1] == p[1] for c, p in zip(clusters, pairs)
    )
    max_dev = 0.0
    for (num_val, _), (ana_val, _) in zip(clusters, pairs):
        if ana_val == 0.0:
            dev = abs(num_val) / lam_max
        else:
            dev = abs(num_val - ana_val) / abs(ana_val)
        max_dev = max(max_dev, dev)
    return max_dev, mults_ok


def numeric_feature_spectrum(state: ModelState, cfg: ProblemConfig) -> SpectrumReport:
    """Eigen-decomposition of the first per-class feature block."""
    block = numeric_hessian_features(state, cfg)[0]
    vals = np.linalg.eigvalsh(block)
    pairs = cluster_eigenvalues(vals)
    lam_max = vals[-1]
    degenerate = lam_max <= 0.0 or cfg.K == 2
    kappa = math.nan if lam_max <= 0.0 else condition_number(vals)
    return SpectrumReport(pairs, kappa, "numeric", degenerate)


def numeric_classifier_spectrum(state: ModelState, cfg: ProblemConfig) -> SpectrumReport:
    """Eigen-decomposition of the assembled classifier Hessian."""
    M = numeric_hessian_classifier(state, cfg)
    vals = np.linalg.eigvalsh(M)
    pairs = cluster_eigenvalues(vals)
    lam_max = vals[-1]
    degenerate = lam_max <= 0.0
    kappa = math.nan if lam_max <= 0.0 else condition_number(vals)
    return SpectrumReport(pairs, kappa, "numeric", degenerate)
