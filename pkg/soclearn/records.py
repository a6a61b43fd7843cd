"""
SocLearn - Trial Records
Columnar container for simulated or ingested trials and its CSV schema
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, List, Sequence, Union

import numpy as np
import pandas as pd

from .exceptions import EmptyInputError, ParameterError
from .models import State, TrialRecord

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ["trial_id", "position", "q", "state", "signal", "obs_L", "obs_R", "action", "correct"]
_LABELS = np.array([State.L.name, State.R.name])


@dataclass(eq=False)
class TrialBatch:
    """
    Trials stored as (trials x agents) arrays

    Row t holds trial trial_ids[t]; column p holds the agent at position p + 1.
    Actions and states use State values (0 = L, 1 = R).
    """
    trial_ids: np.ndarray
    states: np.ndarray
    q: np.ndarray
    signals: np.ndarray
    obs_L: np.ndarray
    obs_R: np.ndarray
    actions: np.ndarray

    def __post_init__(self):
        shape = self.actions.shape
        if self.actions.ndim != 2:
            raise ParameterError(f"actions must be a (trials, agents) array, got shape {shape}")
        for name in ("q", "signals", "obs_L", "obs_R"):
            if getattr(self, name).shape != shape:
                raise ParameterError(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if self.states.shape != (shape[0],) or self.trial_ids.shape != (shape[0],):
            raise ParameterError("states and trial_ids need one entry per trial")

    def __len__(self) -> int:
        return int(self.actions.shape[0])

    def __getitem__(self, row: int) -> TrialRecord:
        return TrialRecord(
            trial_id=int(self.trial_ids[row]),
            state=State(int(self.states[row])),
            q=self.q[row],
            signals=self.signals[row],
            obs_L=self.obs_L[row],
            obs_R=self.obs_R[row],
            actions=self.actions[row],
        )

    def __iter__(self) -> Iterator[TrialRecord]:
        for row in range(len(self)):
            yield self[row]

    @property
    def n_agents(self) -> int:
        return int(self.actions.shape[1])

    @property
    def correct(self) -> np.ndarray:
        return self.actions == self.states[:, None]

    @property
    def trial_q(self) -> np.ndarray:
        """Link probability of the last position, the network density of a sequential trial"""
        return self.q[:, -1]

    @property
    def is_sequential(self) -> bool:
        """Every trial uses a single link probability for all agents"""
        return bool(np.all(self.q == self.q[:, :1]))

    def subset(self, rows: np.ndarray) -> "TrialBatch":
        return TrialBatch(
            trial_ids=self.trial_ids[rows], states=self.states[rows], q=self.q[rows],
            signals=self.signals[rows], obs_L=self.obs_L[rows], obs_R=self.obs_R[rows],
            actions=self.actions[rows],
        )

    def split_by_q(self) -> Dict[float, "TrialBatch"]:
        trial_q = self.trial_q
        return {float(q): self.subset(trial_q == q) for q in np.unique(trial_q)}

    @classmethod
    def concat(cls, batches: Sequence["TrialBatch"]) -> "TrialBatch":
        if not batches:
            raise EmptyInputError("no trial batches to concatenate")
        return cls(**{
            name: np.concatenate([getattr(batch, name) for batch in batches])
            for name in ("trial_ids", "states", "q", "signals", "obs_L", "obs_R", "actions")
        })

    def to_frame(self) -> pd.DataFrame:
        n_trials, n_agents = self.actions.shape
        return pd.DataFrame({
            "trial_id": np.repeat(self.trial_ids, n_agents),
            "position": np.tile(np.arange(1, n_agents + 1), n_trials),
            "q": self.q.ravel(),
            "state": _LABELS[np.repeat(self.states, n_agents)],
            "signal": self.signals.ravel(),
            "obs_L": self.obs_L.ravel(),
            "obs_R": self.obs_R.ravel(),
            "action": _LABELS[self.actions.ravel()],
            "correct": self.correct.ravel().astype(np.int8),
        }, columns=RECORD_COLUMNS)

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "TrialBatch":
        """Rebuild a batch from rows in the record CSV schema"""
        missing = [column for column in RECORD_COLUMNS if column not in frame.columns]
        if missing:
            raise ParameterError(f"trial records are missing columns {missing}")
        if frame.empty:
            raise EmptyInputError("trial record table is empty")

        frame = frame.sort_values(["trial_id", "position"], kind="mergesort")
        sizes = frame.groupby("trial_id", sort=True).size()
        if sizes.nunique() != 1:
            raise ParameterError("all trials in one record table must have the same number of agents")
        n_agents = int(sizes.iloc[0])
        n_trials = len(sizes)

        def grid(column: str, dtype) -> np.ndarray:
            return frame[column].to_numpy(dtype=dtype).reshape(n_trials, n_agents)

        def labels(column: str) -> np.ndarray:
            text = frame[column].astype(str).str.strip().str.upper()
            if not text.isin(["L", "R"]).all():
                raise ParameterError(f"column {column} must contain only L or R")
            return (text == "R").to_numpy().astype(np.int8).reshape(n_trials, n_agents)

        states = labels("state")
        if not np.all(states == states[:, :1]):
            raise ParameterError("state must be constant within a trial")
        return cls(
            trial_ids=sizes.index.to_numpy(dtype=np.int64),
            states=states[:, 0].copy(),
            q=grid("q", float),
            signals=grid("signal", float),
            obs_L=grid("obs_L", np.int16),
            obs_R=grid("obs_R", np.int16),
            actions=labels("action"),
        )


Records = Union[TrialBatch, pd.DataFrame, Sequence[TrialRecord]]


def as_trial_batch(records: Records) -> TrialBatch:
    """Accept a batch, a record table, or a list of TrialRecord"""
    if isinstance(records, TrialBatch):
        if len(records) == 0:
            raise EmptyInputError("no trial records")
        return records
    if isinstance(records, pd.DataFrame):
        return TrialBatch.from_frame(records)
    records = list(records)
    if not records:
        raise EmptyInputError("no trial records")
    return TrialBatch(
        trial_ids=np.array([r.trial_id for r in records], dtype=np.int64),
        states=np.array([r.state.value for r in records], dtype=np.int8),
        q=np.vstack([r.q for r in records]),
        signals=np.vstack([r.signals for r in records]),
        obs_L=np.vstack([r.obs_L for r in records]),
        obs_R=np.vstack([r.obs_R for r in records]),
        actions=np.vstack([r.actions for r in records]),
    )


def write_records(batch: TrialBatch, path: Union[str, Path], append: bool = False) -> None:
    """Write or append rows in the record CSV schema"""
    path = Path(path)
    batch.to_frame().to_csv(path, mode="a" if append else "w", header=not append,
                            index=False, float_format="%.17g")
    logger.debug("wrote %d trials to %s", len(batch), path)


def read_records(path: Union[str, Path]) -> TrialBatch:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"trial record file not found: {path}")
    return TrialBatch.from_frame(pd.read_csv(path, float_precision="round_trip"))


def read_many_records(paths: List[Union[str, Path]]) -> TrialBatch:
    """Read several record files into one batch"""
    return TrialBatch.concat([read_records(path) for path in paths])
