"""
Tests for herding statistics
"""

import numpy as np
import pytest

from soclearn.exceptions import ParameterError, TopologyMismatchError
from soclearn.herding import (
    WINDOW_CENTERS, against_signal_mask, against_signal_stats, evaluator_range,
    fraction_correct_histogram, mean_window_uncertainty, range_accuracy,
    relative_against_signal_frequency, window_uncertainty
)
from soclearn.models import IndependentTopology, TrialConfig
from soclearn.records import TrialBatch
from soclearn.simulator import run_batch, sequential_config


def make_batch(actions, signals=None, states=None, q=0.25):
    actions = np.asarray(actions, dtype=np.int8)
    n_trials, n_agents = actions.shape
    q_grid = np.broadcast_to(np.asarray(q, dtype=float).reshape(-1, 1), (n_trials, n_agents)).copy()
    return TrialBatch(
        trial_ids=np.arange(n_trials),
        states=np.ones(n_trials, dtype=np.int8) if states is None else np.asarray(states, dtype=np.int8),
        q=q_grid,
        signals=np.ones((n_trials, n_agents)) if signals is None else np.asarray(signals, dtype=float),
        obs_L=np.zeros((n_trials, n_agents), dtype=np.int16),
        obs_R=np.zeros((n_trials, n_agents), dtype=np.int16),
        actions=actions,
    )


class TestAgainstSignal:
    """Test going-against-signal counts"""

    def test_mask(self):
        batch = make_batch([[0, 1, 0, 1]], signals=[[1.0, -1.0, -2.0, 3.0]])
        assert against_signal_mask(batch).tolist() == [[True, True, False, False]]

    def test_stats_by_density_and_range(self):
        batch = make_batch(
            [[0, 1, 1, 1], [1, 1, 0, 0]],
            signals=[[1.0, -1.0, 1.0, -1.0], [1.0, 1.0, 1.0, 1.0]],
            states=[1, 0],
            q=[0.25, 0.75],
        )
        rows = {(row.q, row.label): row for row in against_signal_stats(batch, {"late": (3, 4)})}
        sparse = rows[(0.25, "late")]
        assert (sparse.n_decisions, sparse.n_against, sparse.n_against_correct) == (2, 1, 1)
        assert sparse.accuracy == 1.0
        dense = rows[(0.75, "late")]
        assert (dense.n_decisions, dense.n_against, dense.n_against_correct) == (2, 2, 2)
        assert dense.frequency == 1.0

    def test_default_ranges(self):
        batch = make_batch(np.ones((3, 40)))
        labels = {row.label for row in against_signal_stats(batch)}
        assert labels == {"all", "last8"}
        last8 = [row for row in against_signal_stats(batch) if row.label == "last8"][0]
        assert (last8.first, last8.last, last8.n_decisions) == (33, 40, 24)

    def test_no_against_decisions(self):
        row = against_signal_stats(make_batch(np.ones((2, 5))))[0]
        assert np.isnan(row.accuracy)
        assert row.to_dict()["accuracy_given_against"] is None

    def test_bad_range(self):
        with pytest.raises(ParameterError):
            against_signal_stats(make_batch(np.ones((2, 5))), {"bad": (3, 9)})

    def test_relative_frequency(self):
        observed = make_batch([[0, 0, 1, 1]])
        reference = make_batch([[0, 1, 1, 1]])
        assert relative_against_signal_frequency(observed, reference) == pytest.approx(2.0)
        with pytest.raises(ParameterError):
            relative_against_signal_frequency(observed, make_batch([[1, 1, 1, 1]]))


class TestWindowUncertainty:
    """Test moving-window uncertainty"""

    def test_unanimous_trials_have_no_uncertainty(self):
        u = window_uncertainty(make_batch(np.ones((4, 40))))
        assert u.shape == (4, len(WINDOW_CENTERS))
        assert np.all(u == 0.0)

    def test_window_covers_center_plus_minus_five(self):
        actions = np.zeros((1, 40))
        actions[0, :20] = 1  # positions 1..20 guess R
        u = window_uncertainty(make_batch(actions))
        # center 15 covers 10..20, all R
        assert u[0, WINDOW_CENTERS.index(15)] == 0.0
        # center 20 covers 15..25: six R out of eleven
        assert u[0, WINDOW_CENTERS.index(20)] == pytest.approx((6 / 11) * (5 / 11))

    def test_needs_sequential_forty_agents(self):
        with pytest.raises(TopologyMismatchError):
            window_uncertainty(make_batch(np.ones((2, 30))))
        independent = make_batch(np.ones((2, 40)))
        independent.q[:, :10] = 0.0
        with pytest.raises(TopologyMismatchError):
            window_uncertainty(independent)

    def test_mean_by_density(self):
        actions = np.ones((2, 40))
        actions[1, ::2] = 0
        means = mean_window_uncertainty(make_batch(actions, q=[0.25, 0.75]))
        assert sorted(means) == [0.25, 0.75]
        assert np.all(means[0.25] == 0.0)
        assert np.all(means[0.75] > 0.2)


class TestAccuracyDistribution:
    """Test per-trial accuracy summaries"""

    def test_histogram(self):
        actions = np.ones((4, 10))
        actions[1, :5] = 0
        actions[2, :] = 0
        hist = fraction_correct_histogram(make_batch(actions), bins=10)
        assert hist.counts.sum() == 4
        assert hist.mean == pytest.approx((1.0 + 0.5 + 0.0 + 1.0) / 4)
        assert hist.std == pytest.approx(np.std([1.0, 0.5, 0.0, 1.0], ddof=1))
        assert len(hist.to_dict()["edges"]) == 11

    def test_single_trial_has_zero_spread(self):
        assert fraction_correct_histogram(make_batch(np.ones((1, 5)))).std == 0.0

    def test_range_accuracy(self):
        actions = np.ones((2, 20))
        actions[1, 9:] = 0
        result = range_accuracy(make_batch(actions, q=[0.25, 0.75]), 10, 20)
        assert result == {0.25: 1.0, 0.75: 0.0}
        with pytest.raises(ParameterError):
            range_accuracy(make_batch(actions), 0, 5)


class TestEvaluatorRange:
    """Test the positions that observe anyone"""

    def test_independent_topology(self):
        topology = IndependentTopology(n_initial=6, n_sparse_evaluators=3, n_dense_evaluators=4)
        _, batch = run_batch(TrialConfig(topology=topology), 5, 3)
        assert evaluator_range(batch) == (7, 13)

    def test_sequential_trials_cover_every_position(self):
        assert evaluator_range(make_batch(np.ones((2, 9)), q=0.5)) == (1, 9)

    def test_no_links(self):
        with pytest.raises(TopologyMismatchError):
            evaluator_range(make_batch(np.ones((2, 9)), q=0.0))


class TestSimulatedHerdingSignature:
    """Denser networks herd more: wider accuracy spread, more consensus in every window"""

    @pytest.fixture(scope="class")
    def arms(self):
        _, sparse = run_batch(sequential_config(0.25), 10_000, 11)
        _, dense = run_batch(sequential_config(0.75), 10_000, 11, first_trial=10_000)
        return TrialBatch.concat([sparse, dense])

    def test_accuracy_spread(self, arms):
        split = arms.split_by_q()
        assert fraction_correct_histogram(split[0.75]).std > fraction_correct_histogram(split[0.25]).std

    def test_window_uncertainty_lower_when_dense(self, arms):
        means = mean_window_uncertainty(arms)
        assert np.all(means[0.75] < means[0.25])

    def test_going_against_signal_pays_less_when_dense(self, arms):
        rows = {row.q: row for row in against_signal_stats(arms) if row.label == "last8"}
        assert rows[0.75].accuracy < rows[0.25].accuracy
