"""
Tests for trial records
"""

import numpy as np
import pandas as pd
import pytest

from soclearn.exceptions import EmptyInputError, ParameterError
from soclearn.models import State
from soclearn.records import (
    RECORD_COLUMNS, TrialBatch, as_trial_batch, read_many_records, read_records, write_records
)
from soclearn.simulator import run_batch, sequential_config


def small_batch():
    return TrialBatch(
        trial_ids=np.array([0, 1]),
        states=np.array([1, 0], dtype=np.int8),
        q=np.array([[0.25, 0.25, 0.25], [0.75, 0.75, 0.75]]),
        signals=np.array([[0.5, -1.25, 2.0], [-0.3, 0.1, -2.2]]),
        obs_L=np.array([[0, 0, 1], [0, 1, 1]], dtype=np.int16),
        obs_R=np.array([[0, 1, 0], [0, 0, 1]], dtype=np.int16),
        actions=np.array([[1, 0, 1], [0, 1, 0]], dtype=np.int8),
    )


class TestTrialBatch:
    """Test the columnar container"""

    def test_shapes_are_checked(self):
        batch = small_batch()
        with pytest.raises(ParameterError):
            TrialBatch(trial_ids=batch.trial_ids, states=batch.states, q=batch.q[:, :2],
                       signals=batch.signals, obs_L=batch.obs_L, obs_R=batch.obs_R,
                       actions=batch.actions)

    def test_container_protocol(self):
        batch = small_batch()
        assert len(batch) == 2
        assert batch.n_agents == 3
        assert batch[1].state is State.L
        assert [record.trial_id for record in batch] == [0, 1]

    def test_correct_and_density(self):
        batch = small_batch()
        assert batch.correct.tolist() == [[True, False, True], [True, False, True]]
        assert list(batch.trial_q) == [0.25, 0.75]
        assert batch.is_sequential

    def test_split_and_concat(self):
        batch = small_batch()
        arms = batch.split_by_q()
        assert sorted(arms) == [0.25, 0.75]
        assert list(arms[0.75].trial_ids) == [1]
        joined = TrialBatch.concat([arms[0.25], arms[0.75]])
        assert np.array_equal(joined.actions, batch.actions)

    def test_concat_needs_batches(self):
        with pytest.raises(EmptyInputError):
            TrialBatch.concat([])


class TestFrames:
    """Test the record table schema"""

    def test_to_frame(self):
        frame = small_batch().to_frame()
        assert list(frame.columns) == RECORD_COLUMNS
        assert len(frame) == 6
        first = frame.iloc[0]
        assert first["state"] == "R"
        assert first["action"] == "R"
        assert first["correct"] == 1
        assert list(frame["position"][:3]) == [1, 2, 3]

    def test_frame_round_trip_keeps_every_field(self):
        batch = small_batch()
        rebuilt = TrialBatch.from_frame(batch.to_frame().sample(frac=1.0, random_state=3))
        for name in ("trial_ids", "states", "q", "signals", "obs_L", "obs_R", "actions"):
            assert np.array_equal(getattr(rebuilt, name), getattr(batch, name)), name

    def test_missing_column(self):
        frame = small_batch().to_frame().drop(columns=["obs_R"])
        with pytest.raises(ParameterError):
            TrialBatch.from_frame(frame)

    def test_bad_labels(self):
        frame = small_batch().to_frame()
        frame.loc[0, "action"] = "X"
        with pytest.raises(ParameterError):
            TrialBatch.from_frame(frame)

    def test_state_must_be_constant(self):
        frame = small_batch().to_frame()
        frame.loc[1, "state"] = "L"
        with pytest.raises(ParameterError):
            TrialBatch.from_frame(frame)

    def test_ragged_trials(self):
        frame = small_batch().to_frame().iloc[:-1]
        with pytest.raises(ParameterError):
            TrialBatch.from_frame(frame)

    def test_empty_table(self):
        with pytest.raises(EmptyInputError):
            TrialBatch.from_frame(pd.DataFrame(columns=RECORD_COLUMNS))

    def test_as_trial_batch_accepts_records(self):
        batch = small_batch()
        rebuilt = as_trial_batch(list(batch))
        assert np.array_equal(rebuilt.signals, batch.signals)
        with pytest.raises(EmptyInputError):
            as_trial_batch([])


class TestFiles:
    """Test CSV persistence"""

    def test_simulated_records_survive_csv(self, tmp_path):
        _, batch = run_batch(sequential_config(0.5, n_agents=10), 12, 5)
        path = tmp_path / "records.csv"
        write_records(batch, path)
        loaded = read_records(path)
        assert np.array_equal(loaded.signals, batch.signals)
        assert np.array_equal(loaded.actions, batch.actions)

    def test_append_and_many(self, tmp_path):
        batch = small_batch()
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        write_records(batch.subset(np.array([0])), first)
        write_records(batch.subset(np.array([1])), first, append=True)
        write_records(batch, second)
        assert len(read_records(first)) == 2
        assert len(read_many_records([first, second])) == 4

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            read_records(tmp_path / "absent.csv")
