import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ufmlab.config import ProblemConfig
from ufmlab.core import (
    ModelState,
    SATURATION_VALUE,
    ls_equalization_gap,
    one_hot_labels,
    smooth_labels,
    softmax_cols,
    ufm_gradient,
    ufm_loss,
)

from helpers import fd_gradient, pack, random_state


class TestSoftmax:
    def test_zero_column_is_uniform(self):
        out = softmax_cols(np.zeros((4, 1)))
        assert np.allclose(out, 0.25)

    def test_analytic_two_class(self):
        out = softmax_cols(np.array([[math.log(3.0)], [0.0]]))
        assert np.allclose(out[:, 0], [0.75, 0.25])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            softmax_cols(np.array([[np.inf], [0.0]]))

    @given(st.lists(st.floats(-50, 50), min_size=2, max_size=6),
           st.floats(-100, 100))
    @settings(max_examples=50)
    def test_shift_invariance(self, col, c):
        z = np.array(col)[:, None]
        assert np.allclose(softmax_cols(z + c), softmax_cols(z), atol=1e-12)

    def test_columns_sum_to_one_and_positive(self):
        rng = np.random.default_rng(0)
        out = softmax_cols(rng.standard_normal((5, 40)) * 10)
        assert np.allclose(out.sum(axis=0), 1.0, atol=1e-12)
        assert np.all(out > 0)


class TestSmoothLabels:
    def test_zero_delta_identity(self):
        Y = one_hot_labels(3, 2)
        assert np.array_equal(smooth_labels(Y, 0.0), Y)

    def test_delta_one_uniform(self):
        Y = one_hot_labels(4, 1)
        assert np.allclose(smooth_labels(Y, 1.0), 0.25)

    def test_forced_entries(self):
        Y = one_hot_labels(4, 1)
        Yd = smooth_labels(Y, 0.2)
        assert np.allclose(np.sort(Yd[:, 0])[-1], 0.85)
        assert np.allclose(np.sort(Yd[:, 0])[:-1], 0.05)

    def test_rejects_bad_delta(self):
        Y = one_hot_labels(3, 1)
        with pytest.raises(ValueError):
            smooth_labels(Y, -0.1)
        with pytest.raises(ValueError):
            smooth_labels(Y, 1.5)

    def test_columns_sum_to_one(self):
        Yd = smooth_labels(one_hot_labels(5, 3), 0.3)
        assert np.allclose(Yd.sum(axis=0), 1.0)


class TestLoss:
    def test_zero_state_gives_log_k(self):
        cfg = ProblemConfig(K=4, n=2, d=5, delta=0.1)
        state = ModelState(np.zeros((5, 4)), np.zeros((5, 8)), np.zeros(4))
        assert ufm_loss(state, cfg) == pytest.approx(math.log(4), abs=1e-12)

    def test_hand_computed_small_instance(self):
        cfg = ProblemConfig(K=2, n=1, d=2, delta=0.0,
                            lambda_w=0.01, lambda_h=0.02, lambda_b=0.03)
        W = np.array([[1.0, -0.5], [0.2, 0.3]])
        H = np.array([[0.4, -0.1], [-0.2, 0.6]])
        b = np.array([0.1, -0.2])
        state = ModelState(W, H, b)
        # scalar-by-scalar cross entropy, no matrix shortcuts
        total = 0.0
        for j, label in enumerate((0, 1)):
            z = [W[0, 0] * H[0, j] + W[1, 0] * H[1, j] + b[0],
                 W[0, 1] * H[0, j] + W[1, 1] * H[1, j] + b[1]]
            denom = math.exp(z[0]) + math.exp(z[1])
            total += -math.log(math.exp(z[label]) / denom)
        expected = total / 2
        expected += 0.005 * sum(W.ravel() ** 2) + 0.01 * sum(H.ravel() ** 2)
        expected += 0.015 * sum(b**2)
        assert ufm_loss(state, cfg) == pytest.approx(expected, rel=1e-12)

    def test_dimension_mismatch(self):
        cfg = ProblemConfig(K=3, n=2, d=4)
        state = ModelState(np.zeros((4, 2)), np.zeros((4, 6)), np.zeros(3))
        with pytest.raises(ValueError):
            ufm_loss(state, cfg)

    def test_affine_in_target(self):
        # loss with smoothed targets = (1-delta) loss(one-hot) + delta loss(uniform)
        from ufmlab.core import cross_entropy_cols
        from helpers import phi_unregularized

        rng = np.random.default_rng(3)
        delta = 0.25
        base = dict(K=3, n=2, d=4, lambda_w=4e-3, lambda_h=6e-3, lambda_b=2e-3)
        cfg_d = ProblemConfig(delta=delta, **base)
        cfg_0 = ProblemConfig(delta=0.0, **base)
        for _ in range(10):
            state = random_state(cfg_d, rng)
            l_0 = ufm_loss(state, cfg_0)
            reg = l_0 - phi_unregularized(state, cfg_0)
            l_u = cross_entropy_cols(state.logits(), np.full((3, 6), 1 / 3)).sum() / 6 + reg
            assert ufm_loss(state, cfg_d) == pytest.approx(
                (1 - delta) * l_0 + delta * l_u, abs=1e-12
            )


class TestGradient:
    def test_matches_finite_differences(self):
        rng = np.random.default_rng(7)
        cfg = ProblemConfig(K=3, n=2, d=4, delta=0.1)
        state = random_state(cfg, rng)
        G_W, G_H, g_b = ufm_gradient(state, cfg)
        analytic = np.concatenate([G_W.ravel(), G_H.ravel(), g_b])
        numeric = fd_gradient(cfg, state)
        rel = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
        assert rel < 1e-6

    def test_zero_state_gradient_vanishes(self):
        # balanced classes make the uniform-prediction gradient cancel
        cfg = ProblemConfig(K=4, n=3, d=5, delta=0.2)
        state = ModelState(np.zeros((5, 4)), np.zeros((5, 12)), np.zeros(4))
        G_W, G_H, g_b = ufm_gradient(state, cfg)
        assert np.allclose(G_W, 0) and np.allclose(G_H, 0)
        assert np.allclose(g_b, 0, atol=1e-15)

    def test_random_instances_property(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            K = int(rng.integers(2, 6))
            d = int(rng.integers(K, 7))
            n = int(rng.integers(1, 4))
            cfg = ProblemConfig(K=K, n=n, d=d, delta=float(rng.uniform(0, 0.5)))
            state = random_state(cfg, rng, scale=0.8)
            G_W, G_H, g_b = ufm_gradient(state, cfg)
            analytic = np.concatenate([G_W.ravel(), G_H.ravel(), g_b])
            numeric = fd_gradient(cfg, state)
            rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)
            assert rel < 1e-6


class TestEqualizationGap:
    def test_equal_non_target_gives_zero(self):
        p = np.array([0.6, 0.2, 0.2])
        assert ls_equalization_gap(p, 0, 0.1) == pytest.approx(0.0, abs=1e-12)

    def test_unequal_non_target_positive(self):
        p = np.array([0.6, 0.3, 0.1])
        assert ls_equalization_gap(p, 0, 0.1) > 0

    def test_direct_evaluation_oracle(self):
        p = np.array([0.5, 0.3, 0.15, 0.05])
        delta, K, t = 0.2, 4, 1
        target = np.full(K, delta / K)
        target[t] += 1 - delta
        p_eq = np.full(K, (1 - p[t]) / (K - 1))
        p_eq[t] = p[t]
        expected = -(target * np.log(p)).sum() + (target * np.log(p_eq)).sum()
        assert ls_equalization_gap(p, t, delta) == pytest.approx(expected, rel=1e-12)

    def test_random_vectors_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(1000):
            K = int(rng.integers(2, 7))
            p = rng.dirichlet(np.ones(K))
            gap = ls_equalization_gap(p, int(rng.integers(K)), 0.3)
            assert gap >= -1e-12

    def test_zero_non_target_saturates_with_flag(self):
        p = np.array([0.7, 0.3, 0.0])
        gap, flag = ls_equalization_gap(p, 0, 0.1, with_flag=True)
        assert flag
        assert gap >= SATURATION_VALUE * 0.5

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            ls_equalization_gap(np.array([0.5, 0.5]), 0, 0.0)
        with pytest.raises(ValueError):
            ls_equalization_gap(np.array([0.5, 0.4]), 0, 0.1)
