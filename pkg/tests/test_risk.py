import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothtrack.design import closed_loop, gain_from_gamma, solve_normalized_riccati
from smoothtrack.exceptions import DegenerateGainError, InstabilityError
from smoothtrack.linalg import lyapunov_residual
from smoothtrack.risk import (
    bias_vector,
    bias_vector_solve,
    cost,
    risk_decomposition,
    variance_matrix,
)

from conftest import lyapunov_by_quadrature, random_stable_gain

EXAMPLE_2_GAIN = np.array([9.225, 42.550, 98.132])


class TestBias:
    def test_k0(self):
        assert bias_vector([4.0], 3.0) == pytest.approx([0.75])

    def test_example_2(self):
        expected = [100 / 98.132, 100 * 9.225 / 98.132, 100 * 42.550 / 98.132]
        np.testing.assert_allclose(bias_vector(EXAMPLE_2_GAIN, 100.0), expected, rtol=1e-14)
        np.testing.assert_allclose(bias_vector_solve(EXAMPLE_2_GAIN, 100.0), expected, rtol=1e-12)

    def test_no_drift(self):
        np.testing.assert_array_equal(bias_vector(EXAMPLE_2_GAIN, 0.0), np.zeros(3))

    @pytest.mark.parametrize("k", range(7))
    def test_closed_form_matches_solve(self, rng, k):
        for _ in range(10):
            q = random_stable_gain(rng, k)
            L = rng.uniform(0.1, 100)
            closed = bias_vector(q, L)
            solved = bias_vector_solve(q, L)
            assert np.abs(closed - solved).max() <= 1e-10 * max(1.0, np.abs(closed).max())

    def test_degenerate(self):
        with pytest.raises(DegenerateGainError):
            bias_vector([1.0, 0.0], 1.0)
        with pytest.raises(DegenerateGainError):
            bias_vector_solve([1.0, 1e-13], 1.0)


class TestVariance:
    @pytest.mark.parametrize("q0,sigma", [(1.0, 1.0), (5.0, 0.3)])
    def test_k0(self, q0, sigma):
        assert variance_matrix([q0], sigma)[0, 0] == pytest.approx(sigma**2 * q0 / 2, rel=1e-14)

    def test_noiseless(self):
        np.testing.assert_array_equal(variance_matrix(EXAMPLE_2_GAIN, 0.0), np.zeros((3, 3)))

    def test_k1_quadrature(self):
        q = np.array([math.sqrt(2), 1.0])
        P = variance_matrix(q, 1.0)
        F = closed_loop(q)
        np.testing.assert_allclose(P, lyapunov_by_quadrature(F, np.outer(q, q)), atol=1e-6)

    @pytest.mark.parametrize("k", range(5))
    def test_trace_matches_integral(self, rng, k):
        q = random_stable_gain(rng, k)
        sigma = 0.7
        P = variance_matrix(q, sigma)
        oracle = lyapunov_by_quadrature(closed_loop(q), sigma**2 * np.outer(q, q))
        assert np.trace(P) == pytest.approx(np.trace(oracle), abs=1e-6)

    def test_lyapunov_residual(self):
        P = variance_matrix(EXAMPLE_2_GAIN, 0.25)
        W = 0.25**2 * np.outer(EXAMPLE_2_GAIN, EXAMPLE_2_GAIN)
        assert lyapunov_residual(closed_loop(EXAMPLE_2_GAIN), P, W) <= 1e-9 * np.abs(W).max()

    def test_unstable_gain(self):
        with pytest.raises(InstabilityError):
            variance_matrix([-1.0, 1.0], 1.0)


class TestCost:
    @pytest.mark.parametrize("gamma,sigma,L", [(1.0, 1.0, 1.0), (2.0, 0.25, 100.0), (0.3, 3.0, 0.1)])
    def test_k0_closed_form(self, gamma, sigma, L):
        q = gain_from_gamma(solve_normalized_riccati(0), gamma, sigma).q
        expected = sigma * gamma / 2 + L**2 * sigma**2 / gamma**2
        assert cost(q, L, sigma) == pytest.approx(expected, rel=1e-12)

    def test_degenerate_zero(self):
        assert cost(EXAMPLE_2_GAIN, 0.0, 0.0) == 0.0

    def test_dual_path_example_2(self):
        c = cost(EXAMPLE_2_GAIN, 100.0, 0.25)
        M = bias_vector_solve(EXAMPLE_2_GAIN, 100.0)
        P = variance_matrix(EXAMPLE_2_GAIN, 0.25)
        assert c == pytest.approx(np.trace(P) + M @ M, rel=1e-9)

    def test_decomposition(self):
        r = risk_decomposition(EXAMPLE_2_GAIN, 100.0, 0.25)
        assert r.cost == pytest.approx(np.trace(r.variance) + r.bias @ r.bias)
        assert r.cost == pytest.approx(cost(EXAMPLE_2_GAIN, 100.0, 0.25))
        assert np.linalg.eigvalsh(r.variance).min() >= -1e-12

    @settings(max_examples=25, deadline=None)
    @given(k=st.integers(0, 4), seed=st.integers(0, 10_000))
    def test_monotone_in_L_and_sigma(self, k, seed):
        q = random_stable_gain(np.random.default_rng(seed), k)
        grid = [0.0, 0.1, 1.0, 3.0, 10.0]
        for sigma in grid[1:]:
            vals = [cost(q, L, sigma) for L in grid]
            assert np.all(np.diff(vals) >= 0)
        for L in grid[1:]:
            vals = [cost(q, L, s) for s in grid]
            assert np.all(np.diff(vals) >= 0)

    @pytest.mark.parametrize("k", range(5))
    def test_variance_scaling_along_family(self, k):
        # each P_jj scales with its own power, so compare the whole matrix
        U = solve_normalized_riccati(k)
        sigma = 0.4
        P1 = variance_matrix(gain_from_gamma(U, 2.0 * sigma, sigma).q, sigma)
        P2 = variance_matrix(gain_from_gamma(U, 50.0 * sigma, sigma).q, sigma)
        idx = np.add.outer(np.arange(k + 1), np.arange(k + 1))
        ratio = 25.0 ** ((idx + 1) / (k + 1))
        np.testing.assert_allclose(P2, P1 * ratio, rtol=1e-6, atol=1e-12)
        if k == 0:
            assert np.trace(P2) / np.trace(P1) == pytest.approx(25.0, rel=1e-6)
