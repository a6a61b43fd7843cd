"""
Tests for the learning environment
"""

import numpy as np
import pytest

from soclearn.environment import (
    DrawPurpose, autarky_accuracy, derive_rng, naive_actions, naive_decide, naive_posterior,
    sample_link_matrix, sample_network, sample_signal, sample_signals, sample_state,
    signal_loglik_ratio, std_normal_cdf, std_normal_pdf
)
from soclearn.exceptions import ParameterError
from soclearn.models import NetworkParams, ObservedCounts, SignalParams, State


class TestGaussian:
    """Test Gaussian helpers"""

    def test_cdf_values(self):
        assert std_normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
        assert std_normal_cdf(0.5) == pytest.approx(0.691462461274013, abs=1e-12)
        assert std_normal_cdf(1.0) == pytest.approx(0.8413447460685429, abs=1e-12)

    def test_cdf_deep_tail_is_positive(self):
        assert 0.0 < std_normal_cdf(-30.0) < 1e-190

    def test_pdf_values(self):
        assert std_normal_pdf(-0.5) == pytest.approx(0.3520653267642995, abs=1e-14)
        assert std_normal_pdf(0.0) == pytest.approx(1.0 / np.sqrt(2.0 * np.pi))

    def test_autarky_accuracy(self):
        assert autarky_accuracy(SignalParams()) == pytest.approx(0.691462461274013, abs=1e-12)

    def test_signal_loglik_ratio(self):
        assert signal_loglik_ratio(2.0, SignalParams(mu=1.0, sigma=2.0)) == pytest.approx(1.0)


class TestSeeding:
    """Test per-trial random streams"""

    def test_same_inputs_same_draws(self):
        a = derive_rng(42, 3, DrawPurpose.SIGNAL).standard_normal(5)
        b = derive_rng(42, 3, DrawPurpose.SIGNAL).standard_normal(5)
        assert np.array_equal(a, b)

    def test_purposes_and_trials_differ(self):
        base = derive_rng(42, 3, DrawPurpose.SIGNAL).random(5)
        assert not np.array_equal(base, derive_rng(42, 3, DrawPurpose.LINK).random(5))
        assert not np.array_equal(base, derive_rng(42, 4, DrawPurpose.SIGNAL).random(5))
        assert not np.array_equal(base, derive_rng(43, 3, DrawPurpose.SIGNAL).random(5))

    def test_state_is_balanced(self):
        states = [sample_state(derive_rng(7, t, DrawPurpose.STATE)) for t in range(2000)]
        share_R = np.mean([s is State.R for s in states])
        assert abs(share_R - 0.5) < 4 * np.sqrt(0.25 / 2000)


class TestSampling:
    """Test signal and network draws"""

    def test_signal_mean_and_sd(self):
        rng = np.random.default_rng(1)
        draws = sample_signals(State.R, SignalParams(), rng, 100_000)
        assert abs(draws.mean() - 1.0) < 3 * 2.0 / np.sqrt(100_000)
        assert abs(draws.std() - 2.0) < 0.03

    def test_single_signal_is_float(self):
        assert isinstance(sample_signal(State.L, SignalParams(), np.random.default_rng(0)), float)

    def test_link_matrix_is_strictly_lower(self):
        links = sample_link_matrix(30, 0.5, np.random.default_rng(3))
        assert not np.any(np.triu(links))

    @pytest.mark.parametrize("q, expected", [(0.0, 0), (1.0, 30 * 29 // 2)])
    def test_link_matrix_extremes(self, q, expected):
        links = sample_link_matrix(30, q, np.random.default_rng(3))
        assert links.sum() == expected

    def test_link_frequency(self):
        rng = np.random.default_rng(11)
        n, q, reps = 20, 0.25, 400
        total = sum(sample_link_matrix(n, q, rng).sum() for _ in range(reps))
        pairs = reps * n * (n - 1) / 2
        assert abs(total / pairs - q) < 4 * np.sqrt(q * (1 - q) / pairs)

    def test_per_observer_q(self):
        q = np.array([0.0, 0.0, 1.0, 0.0])
        links = sample_link_matrix(4, q, np.random.default_rng(0))
        assert list(links[2]) == [True, True, False, False]
        assert links[3].sum() == 0

    def test_sample_network(self):
        net = sample_network(NetworkParams(q=1.0, n_agents=4), np.random.default_rng(0))
        assert net.of(1) == ()
        assert net.of(4) == (1, 2, 3)


class TestNaiveDecision:
    """Test the naive decision rule"""

    def test_posterior(self):
        params = SignalParams()
        assert naive_posterior(1.0, ObservedCounts(0, 2), 0.5, params) == pytest.approx(1.5)

    def test_follows_majority_of_observations(self):
        params = SignalParams()
        assert naive_decide(0.5, ObservedCounts(3, 0), 0.8, params) is State.L
        assert naive_decide(-0.5, ObservedCounts(0, 3), 0.8, params) is State.R

    def test_follows_signal_without_observations(self):
        params = SignalParams()
        assert naive_decide(0.1, ObservedCounts(), 0.8, params) is State.R
        assert naive_decide(-0.1, ObservedCounts(), 0.8, params) is State.L

    def test_tie_breaks_on_own_signal(self):
        params = SignalParams()
        # s/2 + (i' - i) * ell == 0 exactly
        assert naive_decide(-2.0, ObservedCounts(0, 1), 1.0, params) is State.L
        assert naive_decide(2.0, ObservedCounts(1, 0), 1.0, params) is State.R
        assert naive_decide(0.0, ObservedCounts(), 1.0, params) is State.R

    def test_rejects_nonpositive_ell(self):
        with pytest.raises(ParameterError):
            naive_decide(1.0, ObservedCounts(), 0.0, SignalParams())

    def test_vectorized_matches_scalar(self):
        params = SignalParams()
        rng = np.random.default_rng(5)
        signals = np.concatenate([rng.normal(0, 2, 200), [-2.0, 2.0, 0.0]])
        obs_L = np.concatenate([rng.integers(0, 5, 200), [0, 1, 0]])
        obs_R = np.concatenate([rng.integers(0, 5, 200), [1, 0, 0]])
        vectorized = naive_actions(signals, obs_L, obs_R, 1.0, params)
        scalar = [naive_decide(s, ObservedCounts(int(i), int(j)), 1.0, params).value
                  for s, i, j in zip(signals, obs_L, obs_R)]
        assert list(vectorized) == scalar

    @pytest.mark.parametrize("c", [0.3, 2.0, 7.5])
    def test_scale_invariance(self, c):
        # scaling mu by c scales the signal log-likelihood ratio by c
        params = SignalParams()
        scaled = SignalParams(mu=c * params.mu, sigma=params.sigma)
        rng = np.random.default_rng(17)
        signals = rng.normal(0, 2, 300)
        obs_L = rng.integers(0, 6, 300)
        obs_R = rng.integers(0, 6, 300)
        for s, i, j in zip(signals, obs_L, obs_R):
            counts = ObservedCounts(int(i), int(j))
            assert naive_decide(s, counts, 0.9, params) is naive_decide(s, counts, 0.9 * c, scaled)
