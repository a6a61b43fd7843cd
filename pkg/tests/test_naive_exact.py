"""
Tests for the naive exact solver
"""

import time
from itertools import product

import numpy as np
import pytest
from scipy import stats

from soclearn.environment import std_normal_cdf
from soclearn.exceptions import CalibrationError, ParameterError
from soclearn.models import (
    DEFAULT_CHOICE_VARIANT, DEFAULT_ELL_VARIANT, AccuracyCurve, ChoiceProbVariant,
    CountDistribution, EllVariant, NetworkParams, ObservedCounts, SignalParams, State
)
from soclearn.naive_exact import (
    MAX_EXACT_AGENTS, PUBLISHED_NAIVE_ACCURACY, PUBLISHED_POSITIONS, VariantCalibrator,
    binomial_pmf, calibrate_variants, choice_prob_L, compute_ell, crossover_positions,
    naive_accuracy_curve, step_distribution
)

PARAMS = SignalParams(mu=1.0, sigma=2.0)
DERIVED = ChoiceProbVariant.DERIVED_ARGUMENT
PRINTED = ChoiceProbVariant.PRINTED_ARGUMENT
AUTARKY = 0.691462461274013


def brute_force_curve(n_agents, q, ell, params, variant):
    """Accuracy in state R by enumerating every action history and link pattern"""
    histories = {(): 1.0}
    accuracy = []
    for agent in range(n_agents):
        correct = 0.0
        extended = {}
        for history, weight in histories.items():
            chose_L = 0.0
            for links in product((0, 1), repeat=agent):
                link_prob = np.prod([q if link else 1.0 - q for link in links])
                i = sum(1 for link, a in zip(links, history) if link and a == 0)
                i_prime = sum(1 for link, a in zip(links, history) if link and a == 1)
                chose_L += link_prob * choice_prob_L(ObservedCounts(i, i_prime), ell, params, variant)
            correct += weight * (1.0 - chose_L)
            extended[history + (0,)] = extended.get(history + (0,), 0.0) + weight * chose_L
            extended[history + (1,)] = extended.get(history + (1,), 0.0) + weight * (1.0 - chose_L)
        accuracy.append(correct)
        histories = extended
    return np.array(accuracy)


class TestBinomialPmf:
    """Test log-gamma binomial pmf"""

    @pytest.mark.parametrize("n, q", [(0, 0.3), (1, 0.25), (10, 0.75), (39, 0.25)])
    def test_matches_scipy(self, n, q):
        expected = stats.binom.pmf(np.arange(n + 1), n, q)
        assert np.allclose(binomial_pmf(n, q), expected, rtol=1e-10, atol=1e-300)

    def test_degenerate_q(self):
        assert list(binomial_pmf(3, 0.0)) == [1.0, 0.0, 0.0, 0.0]
        assert list(binomial_pmf(3, 1.0)) == [0.0, 0.0, 0.0, 1.0]

    def test_large_n_sums_to_one(self):
        assert binomial_pmf(1000, 0.37).sum() == pytest.approx(1.0, abs=1e-10)

    def test_rejects_bad_q(self):
        with pytest.raises(ParameterError):
            binomial_pmf(3, 1.1)


class TestEll:
    """Test the three readings of ell"""

    def test_values(self):
        assert compute_ell(PARAMS, EllVariant.PRINTED_FORMULA) == pytest.approx(1.2322655, abs=1e-4)
        assert compute_ell(PARAMS, EllVariant.TRUNCATED_MEAN) == pytest.approx(1.00916, abs=1e-4)
        assert compute_ell(PARAMS, EllVariant.EXACT_BINARY) == pytest.approx(0.80697, abs=1e-4)

    def test_all_positive(self):
        for variant in EllVariant:
            assert compute_ell(SignalParams(mu=0.3, sigma=5.0), variant) > 0


class TestChoiceProbability:
    """Test choice probabilities of a naive agent in state R"""

    def test_no_observations_derived_is_autarkic(self):
        ell = compute_ell(PARAMS, EllVariant.EXACT_BINARY)
        assert choice_prob_L(ObservedCounts(), ell, PARAMS, DERIVED) == pytest.approx(1.0 - AUTARKY)

    def test_printed_argument_as_typeset(self):
        ell = 1.0
        value = choice_prob_L(ObservedCounts(2, 1), ell, PARAMS, PRINTED)
        assert value == pytest.approx(float(std_normal_cdf((2.0 * 1 * ell - 4.0) / 2.0)))

    @pytest.mark.parametrize("variant", list(ChoiceProbVariant))
    def test_monotone_in_difference(self, variant):
        ell = compute_ell(PARAMS, EllVariant.EXACT_BINARY)
        below = choice_prob_L(ObservedCounts(0, 1), ell, PARAMS, variant)
        middle = choice_prob_L(ObservedCounts(0, 0), ell, PARAMS, variant)
        above = choice_prob_L(ObservedCounts(1, 0), ell, PARAMS, variant)
        assert below < middle < above

    def test_only_difference_matters(self):
        ell = compute_ell(PARAMS, EllVariant.EXACT_BINARY)
        assert choice_prob_L(ObservedCounts(5, 3), ell, PARAMS, DERIVED) == pytest.approx(
            choice_prob_L(ObservedCounts(2, 0), ell, PARAMS, DERIVED))

    def test_rejects_nonpositive_ell(self):
        with pytest.raises(ParameterError):
            choice_prob_L(ObservedCounts(), -1.0, PARAMS, DERIVED)


class TestDistribution:
    """Test the count-distribution recursion"""

    def test_mass_is_conserved(self):
        ell = compute_ell(PARAMS, EllVariant.EXACT_BINARY)
        dist = CountDistribution.initial()
        for _ in range(25):
            dist = step_distribution(dist, 0.4, ell, PARAMS, DERIVED)
            assert dist.total() == pytest.approx(1.0, abs=1e-12)
            assert np.all(dist.probs >= 0)

    def test_first_step(self):
        ell = compute_ell(PARAMS, EllVariant.EXACT_BINARY)
        dist = step_distribution(CountDistribution.initial(), 0.5, ell, PARAMS, DERIVED)
        assert dist.n == 1
        assert dist.prob(0, 1) == pytest.approx(AUTARKY)
        assert dist.prob(1, 0) == pytest.approx(1.0 - AUTARKY)

    def test_rejects_bad_q(self):
        with pytest.raises(ParameterError):
            step_distribution(CountDistribution.initial(), -0.5, 1.0, PARAMS, DERIVED)


class TestNaiveAccuracyCurve:
    """Test per-position accuracy of naive agents"""

    @pytest.mark.parametrize("q", [0.0, 0.25, 0.75, 1.0])
    def test_first_agent_is_autarkic(self, q):
        curve = naive_accuracy_curve(NetworkParams(q=q, n_agents=5), PARAMS)
        assert curve.at(1) == pytest.approx(AUTARKY, abs=1e-12)

    def test_no_links_is_autarky_everywhere(self):
        curve = naive_accuracy_curve(NetworkParams(q=0.0, n_agents=40), PARAMS)
        assert np.allclose(curve.values, AUTARKY, atol=1e-12)

    def test_second_agent_full_observation(self):
        ell = compute_ell(PARAMS, EllVariant.EXACT_BINARY)
        curve = naive_accuracy_curve(NetworkParams(q=1.0, n_agents=2), PARAMS,
                                     EllVariant.EXACT_BINARY, DERIVED)
        # agent 1 right (saw R): choose L iff s < -2 ell; agent 1 wrong: s < 2 ell
        follow_right = 1.0 - std_normal_cdf((-2.0 * ell - 1.0) / 2.0)
        follow_wrong = 1.0 - std_normal_cdf((2.0 * ell - 1.0) / 2.0)
        expected = AUTARKY * follow_right + (1.0 - AUTARKY) * follow_wrong
        assert curve.at(2) == pytest.approx(float(expected), abs=1e-12)

    @pytest.mark.parametrize("variant", list(ChoiceProbVariant))
    def test_matches_brute_force(self, variant):
        ell = compute_ell(PARAMS, EllVariant.TRUNCATED_MEAN)
        curve = naive_accuracy_curve(NetworkParams(q=0.4, n_agents=6), PARAMS,
                                     EllVariant.TRUNCATED_MEAN, variant)
        assert np.allclose(curve.values, brute_force_curve(6, 0.4, ell, PARAMS, variant), atol=1e-12)

    def test_values_are_probabilities(self):
        for q in (0.25, 0.75):
            curve = naive_accuracy_curve(NetworkParams(q=q, n_agents=40), PARAMS)
            assert np.all((curve.values >= 0) & (curve.values <= 1))

    def test_state_symmetry_of_derived_rule(self):
        net = NetworkParams(q=0.6, n_agents=15)
        in_R = naive_accuracy_curve(net, PARAMS, state=State.R)
        in_L = naive_accuracy_curve(net, PARAMS, state=State.L)
        assert np.allclose(in_R.values, in_L.values, atol=1e-12)

    def test_autarkic_population(self):
        curve = naive_accuracy_curve(NetworkParams(q=0.75, n_agents=10), PARAMS, naive_share=0.0)
        assert np.allclose(curve.values, AUTARKY, atol=1e-12)

    def test_epsilon_flips_actions(self):
        curve = naive_accuracy_curve(NetworkParams(q=0.0, n_agents=3), PARAMS, epsilon=0.1)
        assert curve.at(1) == pytest.approx(0.9 * AUTARKY + 0.1 * (1.0 - AUTARKY))

    def test_label(self):
        curve = naive_accuracy_curve(NetworkParams(q=0.25, n_agents=3), PARAMS,
                                     EllVariant.PRINTED_FORMULA, PRINTED)
        assert curve.model == "naive"
        assert curve.label == "printed/printed"

    def test_agent_limit(self):
        with pytest.raises(ParameterError):
            naive_accuracy_curve(NetworkParams(q=0.5, n_agents=MAX_EXACT_AGENTS + 1), PARAMS)

    def test_rejects_bad_mixture(self):
        with pytest.raises(ParameterError):
            naive_accuracy_curve(NetworkParams(q=0.5, n_agents=3), PARAMS, naive_share=1.5)


class TestCrossover:
    """Test crossover detection"""

    def test_single_crossing(self):
        sparse = AccuracyCurve(values=[0.69, 0.70, 0.72, 0.75, 0.80], q=0.25)
        dense = AccuracyCurve(values=[0.69, 0.73, 0.74, 0.74, 0.74], q=0.75)
        assert crossover_positions(sparse, dense) == [4]

    def test_no_crossing(self):
        sparse = AccuracyCurve(values=[0.69, 0.70, 0.71], q=0.25)
        dense = AccuracyCurve(values=[0.69, 0.75, 0.76], q=0.75)
        assert crossover_positions(sparse, dense) == []


class TestVariantCalibrator:
    """Test calibration of formula readings against a reference table"""

    def _targets(self, ell_variant, choice_variant):
        return {
            q: [naive_accuracy_curve(NetworkParams(q=q, n_agents=12), PARAMS, ell_variant,
                                     choice_variant).at(p) for p in range(5, 13)]
            for q in (0.25, 0.75)
        }

    def test_selects_generating_pair(self):
        targets = self._targets(EllVariant.TRUNCATED_MEAN, DERIVED)
        calibrator = VariantCalibrator(PARAMS, n_agents=12, targets=targets, positions=range(5, 13))
        report = calibrator.calibrate()
        assert report.best.pair == (EllVariant.TRUNCATED_MEAN, DERIVED)
        assert report.best.max_deviation == pytest.approx(0.0, abs=1e-12)
        assert len(report.entries) == 6

    def test_threaded_matches_sequential(self):
        targets = self._targets(EllVariant.EXACT_BINARY, DERIVED)
        sequential = VariantCalibrator(PARAMS, 12, targets, range(5, 13)).calibrate()
        threaded = VariantCalibrator(PARAMS, 12, targets, range(5, 13), max_workers=3).calibrate()
        assert sequential.to_dict() == threaded.to_dict()

    def test_report_dict(self):
        targets = self._targets(EllVariant.EXACT_BINARY, DERIVED)
        data = VariantCalibrator(PARAMS, 12, targets, range(5, 13)).calibrate().to_dict()
        assert data["selected"] == {"ell_variant": "exact", "choice_variant": "derived",
                                    "max_deviation": data["selected"]["max_deviation"]}
        assert len(data["pairs"]) == 6

    def test_unreachable_table_fails(self):
        targets = {0.25: [0.01] * 8, 0.75: [0.01] * 8}
        with pytest.raises(CalibrationError) as excinfo:
            VariantCalibrator(PARAMS, n_agents=12, targets=targets, positions=range(5, 13)).calibrate()
        assert excinfo.value.best_pair is not None
        assert excinfo.value.best_deviation > 0.5


class TestPublishedTable:
    """Test the calibrated readings against the published naive accuracies"""

    def test_calibration_reproduces_published_table(self):
        started = time.perf_counter()
        report = VariantCalibrator(PARAMS).calibrate()
        elapsed = time.perf_counter() - started
        assert report.best.pair == (EllVariant.TRUNCATED_MEAN, DERIVED)
        for q, deviations in report.best.deviations.items():
            assert max(deviations) < 5e-3, q
        assert elapsed < 10.0

    def test_library_defaults_are_the_calibrated_pair(self):
        assert calibrate_variants(PARAMS) == (DEFAULT_ELL_VARIANT, DEFAULT_CHOICE_VARIANT)

    @pytest.mark.parametrize("q", [0.25, 0.75])
    def test_default_curve_matches_published_values(self, q):
        curve = naive_accuracy_curve(NetworkParams(q=q, n_agents=40), PARAMS)
        values = [curve.at(p) for p in PUBLISHED_POSITIONS]
        assert values == pytest.approx(list(PUBLISHED_NAIVE_ACCURACY[q]), abs=5e-3)


class TestComparativeStatic:
    """Dense networks help early agents and hurt late ones"""

    def test_curves_cross(self):
        sparse = naive_accuracy_curve(NetworkParams(q=0.25, n_agents=40), PARAMS)
        dense = naive_accuracy_curve(NetworkParams(q=0.75, n_agents=40), PARAMS)
        assert np.all(dense.values[1:5] > sparse.values[1:5])
        assert np.all(sparse.values[32:] > dense.values[32:])
        assert len(crossover_positions(sparse, dense)) >= 1

    def test_survives_autarkic_mixing(self):
        sparse = naive_accuracy_curve(NetworkParams(q=0.25, n_agents=40), PARAMS, naive_share=0.8)
        dense = naive_accuracy_curve(NetworkParams(q=0.75, n_agents=40), PARAMS, naive_share=0.8)
        assert np.all(sparse.values[32:] > dense.values[32:])
