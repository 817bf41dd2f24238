"""Problem and optimizer configuration dataclasses."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class ProblemConfig:
    """One unconstrained-feature-model instance.

    K classes, n samples per class, feature dimension d, smoothing
    parameter delta in [0, 1), and L2 weights for the classifier,
    the features, and the bias.
    """

    K: int
    n: int
    d: int
    delta: float = 0.0
    lambda_w: float = 5e-3
    lambda_h: float = 5e-3
    lambda_b: float = 5e-3

    def __post_init__(self):
        if self.K < 2:
            raise ValueError(f"K must be >= 2, got {self.K}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.d < self.K:
            raise ValueError(f"d must be >= K ({self.K}), got {self.d}")
        if not 0.0 <= self.delta < 1.0:
            raise ValueError(f"delta must be in [0, 1), got {self.delta}")
        for name in ("lambda_w", "lambda_h", "lambda_b"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def N(self) -> int:
        """Total sample count n*K."""
        return self.n * self.K

    @property
    def lambda_z(self) -> float:
        """Geometric mean of the classifier and feature weights."""
        return math.sqrt(self.lambda_w * self.lambda_h)


@dataclass(frozen=True)
class OptimizerConfig:
    """Full-batch gradient descent settings."""

    learning_rate: float = 0.5
    momentum: float = 0.9
    max_iters: int = 50_000
    loss_tol: float = 1e-10
    record_every: int = 100
    init_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError("momentum must be in [0, 1)")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.loss_tol <= 0.0:
            raise ValueError("loss_tol must be positive")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")
        if self.init_scale < 0.0:
            raise ValueError("init_scale must be nonnegative")
