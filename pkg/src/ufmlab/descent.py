"""Deterministic full-batch gradient descent on the regularized risk.

A single run owns its state; trajectories record loss every iteration
(cheap) and the neural-collapse metrics every `record_every` iterations.
Distance to the closed-form optimum is tracked through rotation-invariant
quantities only (loss gap and the mean-logit mismatch), since the
minimizer's orthogonal factor is not unique.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import OptimizerConfig, ProblemConfig
from .closed_form import global_minimizer, logit_scale, mean_logit_matrix, optimal_loss
from .core import ModelState, gradient_norm, ufm_gradient, ufm_loss
from . import nc_metrics
from . import spectral

DIVERGENCE_LOSS = 1e6


class DivergenceError(RuntimeError):
    """Raised when the loss blows up or turns non-finite."""


@dataclass
class TrajectoryRow:
    iter: int
    loss: float
    nc1: float
    nc2: float
    nc3: float
    w_norm: float
    h_mean_norm: float
    grad_norm: float
    loss_gap: float


@dataclass
class Trajectory:
    rows: list[TrajectoryRow] = field(default_factory=list)
    loss_history: np.ndarray | None = None  # loss at every iteration
    optimal_value: float = float("nan")
    final_state: ModelState | None = None
    converged: bool = False

    @property
    def final_loss(self) -> float:
        return self.rows[-1].loss if self.rows else float("nan")


def init_state(cfg: ProblemConfig, opt: OptimizerConfig) -> ModelState:
    """Seeded Gaussian init scaled by init_scale / sqrt(d); zero bias."""
    rng = np.random.default_rng(opt.seed)
    scale = opt.init_scale / np.sqrt(cfg.d)
    return ModelState(
        W=scale * rng.standard_normal((cfg.d, cfg.K)),
        H=scale * rng.standard_normal((cfg.d, cfg.N)),
        b=np.zeros(cfg.K),
    )


def _metrics_row(state, cfg, it, loss, L_star) -> TrajectoryRow:
    fs = nc_metrics.FeatureSet.from_state(state, cfg)
    try:
        v1 = nc_metrics.nc1(fs)
    except ValueError:
        v1 = float("nan")
    try:
        v2 = nc_metrics.nc2(state.W, fs)
        v3 = nc_metrics.nc3(state.W, fs)
    except ValueError:
        v2 = v3 = float("nan")
    w_norm, h_norm = nc_metrics.norm_summary(state.W, fs)
    return TrajectoryRow(
        iter=it,
        loss=loss,
        nc1=float(v1),
        nc2=v2,
        nc3=v3,
        w_norm=w_norm,
        h_mean_norm=h_norm,
        grad_norm=gradient_norm(state, cfg),
        loss_gap=loss - L_star,
    )


def run(
    cfg: ProblemConfig,
    opt: OptimizerConfig,
    state: ModelState | None = None,
    compute_metrics: bool = True,
) -> Trajectory:
    """Heavy-ball gradient descent until loss - L* < loss_tol or max_iters."""
    if state is None:
        state = init_state(cfg, opt)
    else:
        state = state.copy()
    L_star = optimal_loss(cfg)

    vel_W = np.zeros_like(state.W)
    vel_H = np.zeros_like(state.H)
    vel_b = np.zeros_like(state.b)

    traj = Trajectory(optimal_value=L_star)
    losses = []

    def record(it, loss):
        if compute_metrics:
            traj.rows.append(_metrics_row(state, cfg, it, loss, L_star))
        else:
            traj.rows.append(
                TrajectoryRow(it, loss, np.nan, np.nan, np.nan, np.nan, np.nan,
                              gradient_norm(state, cfg), loss - L_star)
            )

    it = 0
    while True:
        loss = ufm_loss(state, cfg)
        losses.append(loss)
        if not np.isfinite(loss) or loss > DIVERGENCE_LOSS:
            raise DivergenceError(f"loss diverged at iteration {it}: {loss}")
        converged = loss - L_star < opt.loss_tol
        if it % opt.record_every == 0 or converged or it == opt.max_iters:
            if not traj.rows or traj.rows[-1].iter != it:
                record(it, loss)
        if converged or it >= opt.max_iters:
            traj.converged = converged
            break
        G_W, G_H, g_b = ufm_gradient(state, cfg)
        vel_W = opt.momentum * vel_W - opt.learning_rate * G_W
        vel_H = opt.momentum * vel_H - opt.learning_rate * G_H
        vel_b = opt.momentum * vel_b - opt.learning_rate * g_b
        state.W += vel_W
        state.H += vel_H
        state.b += vel_b
        it += 1

    traj.loss_history = np.array(losses)
    traj.final_state = state
    return traj


def iterations_to_epsilon(traj: Trajectory, L_star: float, eps: float):
    """First iteration with loss - L* < eps, or None if never reached."""
    if traj.loss_history is not None and len(traj.loss_history):
        hits = np.nonzero(traj.loss_history - L_star < eps)[0]
        return int(hits[0]) if len(hits) else None
    for row in traj.rows:
        if row.loss - L_star < eps:
            return row.iter
    return None


def mean_logit_distance(state: ModelState, cfg: ProblemConfig) -> float:
    """|| W^T Hbar - a (K I - 11^T) ||_F (rotation-invariant optimum distance)."""
    fs = nc_metrics.FeatureSet.from_state(state, cfg)
    Hbar = nc_metrics.centered_class_means(fs)
    return float(np.linalg.norm(state.W.T @ Hbar - mean_logit_matrix(cfg)))


@dataclass
class SweepRow:
    delta: float
    a_delta: float
    w_norm: float
    kappa_h: float
    kappa_w: float
    iters_to_eps: int | None
    nc1: float
    nc2: float
    nc3: float
    degenerate: bool = False


def delta_sweep(
    cfg_base: ProblemConfig, deltas, opt: OptimizerConfig
) -> list[SweepRow]:
    """One descent run plus analytic quantities per smoothing value."""
    from dataclasses import replace

    rows = []
    for delta in deltas:
        if not 0.0 <= delta < 1.0:
            raise ValueError(f"delta must be in [0, 1), got {delta}")
        cfg = replace(cfg_base, delta=delta)
        a = logit_scale(cfg)
        star = global_minimizer(cfg)
        w_norm = float(np.linalg.norm(star.W))
        degenerate = a == 0.0
        if degenerate:
            kappa_h = kappa_w = float("nan")
        else:
            kappa_h = spectral.analytic_feature_hessian_spectrum(cfg).condition_number
            kappa_w = (
                spectral.analytic_classifier_hessian_spectrum(cfg).condition_number
                if cfg.K >= 3
                else float("nan")
            )
        traj = run(cfg, opt)
        iters = iterations_to_epsilon(traj, traj.optimal_value, opt.loss_tol)
        last = traj.rows[-1]
        rows.append(
            SweepRow(
                delta=delta,
                a_delta=a,
                w_norm=w_norm,
                kappa_h=kappa_h,
                kappa_w=kappa_w,
                iters_to_eps=iters,
                nc1=last.nc1,
                nc2=last.nc2,
                nc3=last.nc3,
                degenerate=degenerate,
            )
        )
    return rows
