"""
SocLearn - Herding Statistics
Going-against-signal counts, window uncertainty and accuracy distributions over trial records
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import EmptyInputError, ParameterError, TopologyMismatchError
from .records import Records, TrialBatch, as_trial_batch

WINDOW_WIDTH = 11
WINDOW_CENTERS = tuple(range(6, 36))

PositionRange = Tuple[int, int]


@dataclass
class AgainstSignalRow:
    """Against-signal decisions of the agents with link probability q in one position range"""
    q: float
    label: str
    first: int
    last: int
    n_decisions: int
    n_against: int
    n_against_correct: int

    @property
    def accuracy(self) -> float:
        """Accuracy conditional on going against the signal (nan without such decisions)"""
        return self.n_against_correct / self.n_against if self.n_against else float("nan")

    @property
    def frequency(self) -> float:
        return self.n_against / self.n_decisions if self.n_decisions else float("nan")

    def to_dict(self) -> Dict[str, object]:
        accuracy = self.accuracy
        return {
            "q": self.q, "positions": self.label, "first": self.first, "last": self.last,
            "decisions": self.n_decisions, "against_signal": self.n_against,
            "against_signal_correct": self.n_against_correct,
            "accuracy_given_against": None if np.isnan(accuracy) else accuracy,
        }


@dataclass
class FractionHistogram:
    """Histogram of per-trial overall fraction correct"""
    edges: np.ndarray
    counts: np.ndarray
    mean: float
    std: float

    def to_dict(self) -> Dict[str, object]:
        return {
            "edges": [float(edge) for edge in self.edges],
            "counts": [int(count) for count in self.counts],
            "mean": self.mean,
            "std": self.std,
        }


def against_signal_mask(batch: TrialBatch) -> np.ndarray:
    """Guessed L on a positive signal or R on a negative one"""
    return ((batch.actions == 0) & (batch.signals > 0)) | ((batch.actions == 1) & (batch.signals < 0))


def default_ranges(batch: TrialBatch) -> Dict[str, PositionRange]:
    n = batch.n_agents
    return {"all": (1, n), "last8": (max(n - 7, 1), n)}


def evaluator_range(batch: TrialBatch) -> PositionRange:
    """First to last position that observes anyone (q > 0) in any trial"""
    linked = np.flatnonzero(np.any(batch.q > 0, axis=0))
    if linked.size == 0:
        raise TopologyMismatchError("no position has a positive link probability")
    return int(linked[0]) + 1, int(linked[-1]) + 1


def against_signal_stats(records: Records,
                         ranges: Optional[Dict[str, PositionRange]] = None) -> List[AgainstSignalRow]:
    """
    Counts of against-signal guesses and how often they were right, per link
    probability and position range (1-based, inclusive)
    """
    batch = as_trial_batch(records)
    ranges = ranges if ranges is not None else default_ranges(batch)
    against = against_signal_mask(batch)
    correct = batch.correct
    positions = np.arange(1, batch.n_agents + 1)

    rows = []
    for label, (first, last) in ranges.items():
        if not 1 <= first <= last <= batch.n_agents:
            raise ParameterError(f"position range {label}=({first}, {last}) is outside 1..{batch.n_agents}")
        in_range = (positions >= first) & (positions <= last)
        for q in np.unique(batch.q[:, in_range]):
            mask = (batch.q == q) & in_range[None, :]
            rows.append(AgainstSignalRow(
                q=float(q), label=label, first=first, last=last,
                n_decisions=int(mask.sum()),
                n_against=int((against & mask).sum()),
                n_against_correct=int((against & correct & mask).sum()),
            ))
    return rows


def relative_against_signal_frequency(observed: Records, reference: Records,
                                      first: int = 1, last: Optional[int] = None) -> float:
    """Against-signal frequency of `observed` as a share of the frequency in `reference`"""
    frequencies = []
    for records in (observed, reference):
        batch = as_trial_batch(records)
        stop = batch.n_agents if last is None else last
        frequencies.append(against_signal_mask(batch)[:, first - 1:stop].mean())
    if frequencies[1] == 0:
        raise ParameterError("reference records never go against their signal")
    return float(frequencies[0] / frequencies[1])


def window_uncertainty(records: Records, width: int = WINDOW_WIDTH,
                       centers: Sequence[int] = WINDOW_CENTERS) -> np.ndarray:
    """
    u = r(1 - r) per trial and window, r the fraction of the window guessing R

    Window with center c covers positions c - width // 2 .. c + width // 2. Returns an
    array of shape (trials, windows).
    """
    batch = as_trial_batch(records)
    half = width // 2
    if not batch.is_sequential:
        raise TopologyMismatchError("window uncertainty needs sequential trials")
    if batch.n_agents < max(centers) + half:
        raise TopologyMismatchError(
            f"windows up to center {max(centers)} need {max(centers) + half} agents, "
            f"records have {batch.n_agents}"
        )
    guessed_R = batch.actions.astype(float)
    uncertainty = np.empty((len(batch), len(centers)))
    for column, center in enumerate(centers):
        share = guessed_R[:, center - half - 1:center + half].mean(axis=1)
        uncertainty[:, column] = share * (1.0 - share)
    return uncertainty


def mean_window_uncertainty(records: Records) -> Dict[float, np.ndarray]:
    """Per network density, the mean of u across trials for every window"""
    batch = as_trial_batch(records)
    return {q: window_uncertainty(arm).mean(axis=0) for q, arm in batch.split_by_q().items()}


def fraction_correct_histogram(records: Records,
                               bins: Union[int, Sequence[float]] = 10) -> FractionHistogram:
    """Histogram of per-trial overall fraction correct, plus its standard deviation"""
    batch = as_trial_batch(records)
    fractions = batch.correct.mean(axis=1)
    counts, edges = np.histogram(fractions, bins=bins, range=(0.0, 1.0))
    std = float(np.std(fractions, ddof=1)) if len(fractions) > 1 else 0.0
    return FractionHistogram(edges=edges, counts=counts, mean=float(fractions.mean()), std=std)


def range_accuracy(records: Records, first: int, last: int) -> Dict[float, float]:
    """Mean accuracy of positions first..last, per network density"""
    batch = as_trial_batch(records)
    if not 1 <= first <= last <= batch.n_agents:
        raise ParameterError(f"position range ({first}, {last}) is outside 1..{batch.n_agents}")
    if len(batch) == 0:
        raise EmptyInputError("no trial records")
    return {
        q: float(arm.correct[:, first - 1:last].mean())
        for q, arm in batch.split_by_q().items()
    }
