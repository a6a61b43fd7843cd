"""
SocLearn - Trial Simulator
Seeded Monte Carlo engine for sequential trials and the independent-neighbors design
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Iterable, Iterator, List, Optional, Tuple, Union

import numpy as np

from .environment import (
    DrawPurpose, derive_rng, naive_actions, sample_link_matrix, sample_signals,
    sample_state, signal_loglik_ratio
)
from .exceptions import ConfigurationError, ParameterError
from .models import (
    BatchSummary, BehaviorKind, ChoiceProbVariant, IndependentTopology, NetworkParams,
    SequentialTopology, TrialConfig, TrialRecord
)
from .naive_exact import compute_ell
from .rational_bound import binary_signal_weight, constrained_accuracy_curve
from .records import TrialBatch, write_records

logger = logging.getLogger(__name__)

TrialSeed = Tuple[int, int]

DEFAULT_CHUNK_SIZE = 1000


class TrialSimulator:
    """
    Runs trials of one configuration

    Each trial draws its state, signals, links, behavior types and action flips from
    separate streams derived from (master seed, trial index, purpose), so a trial's
    content never depends on chunking or worker count.
    """

    def __init__(self, config: TrialConfig):
        self.config = config
        self.behavior = config.behavior
        self.agent_q = config.topology.agent_q()
        self.ell = compute_ell(config.signal, config.ell_variant)

        uses_naive_rule = self.behavior.kind in (
            BehaviorKind.NAIVE, BehaviorKind.MIXED, BehaviorKind.INDEPENDENT_OBSERVED
        )
        if uses_naive_rule and config.choice_variant is not ChoiceProbVariant.DERIVED_ARGUMENT:
            raise ConfigurationError(
                "simulated naive agents threshold their naive posterior, which only the derived "
                "choice probability describes; use choice_variant=derived"
            )

        self.neighbor_weights: Optional[np.ndarray] = None
        if self.behavior.kind is BehaviorKind.CONSTRAINED:
            if not isinstance(config.topology, SequentialTopology):
                raise ConfigurationError("the constrained one-neighbor profile needs a sequential topology")
            bound = constrained_accuracy_curve(config.topology.network, config.signal)
            self.neighbor_weights = np.array([binary_signal_weight(p) for p in bound.values])

    def _draw(self, master_seed: int, trial_indices: np.ndarray):
        config = self.config
        n = config.n_agents
        n_trials = len(trial_indices)
        states = np.empty(n_trials, dtype=np.int8)
        signals = np.empty((n_trials, n))
        links = np.zeros((n_trials, n, n), dtype=bool)
        naive_mask = np.ones((n_trials, n), dtype=bool)
        flips = np.zeros((n_trials, n), dtype=bool)

        for row, trial in enumerate(trial_indices):
            state = sample_state(derive_rng(master_seed, trial, DrawPurpose.STATE))
            states[row] = state.value
            signals[row] = sample_signals(state, config.signal,
                                          derive_rng(master_seed, trial, DrawPurpose.SIGNAL), n)
            links[row] = sample_link_matrix(n, self.agent_q,
                                            derive_rng(master_seed, trial, DrawPurpose.LINK))
            if self.behavior.kind is BehaviorKind.MIXED:
                draws = derive_rng(master_seed, trial, DrawPurpose.BEHAVIOR).random(n)
                naive_mask[row] = draws < self.behavior.naive_share
            elif self.behavior.kind is BehaviorKind.AUTARKIC:
                naive_mask[row] = False
            if self.behavior.epsilon > 0:
                noise = derive_rng(master_seed, trial, DrawPurpose.NOISE)
                flips[row] = noise.random(n) < self.behavior.epsilon

        if isinstance(config.topology, IndependentTopology):
            # evaluators observe the initial agents only
            links[:, :, config.topology.n_initial:] = False
        return states, signals, links, naive_mask, flips

    def _constrained_actions(self, position: int, signals: np.ndarray, observed: np.ndarray,
                             previous: np.ndarray) -> np.ndarray:
        """One-neighbor rule: own signal plus the most recent observed predecessor's action"""
        posterior = signal_loglik_ratio(signals, self.config.signal)
        if position > 0:
            has_neighbor = observed.any(axis=1)
            latest = position - 1 - np.argmax(observed[:, ::-1], axis=1)
            weight = self.neighbor_weights[latest]
            seen = previous[np.arange(len(latest)), latest]
            posterior = posterior + np.where(has_neighbor, np.where(seen == 1, weight, -weight), 0.0)
        tie_break = signals >= 0
        return np.where(posterior > 0, True, np.where(posterior < 0, False, tie_break)).astype(np.int8)

    def simulate(self, master_seed: int, trial_indices: Iterable[int]) -> TrialBatch:
        """Simulate the given trials, vectorized across trials and sequential across positions"""
        trial_indices = np.asarray(list(trial_indices), dtype=np.int64)
        states, signals, links, naive_mask, flips = self._draw(master_seed, trial_indices)
        n_trials, n = signals.shape
        obs_L = np.zeros((n_trials, n), dtype=np.int16)
        obs_R = np.zeros((n_trials, n), dtype=np.int16)
        actions = np.zeros((n_trials, n), dtype=np.int8)

        for position in range(n):
            observed = links[:, position, :position]
            previous = actions[:, :position]
            obs_R[:, position] = (observed & (previous == 1)).sum(axis=1)
            obs_L[:, position] = (observed & (previous == 0)).sum(axis=1)

            own = signals[:, position]
            autarkic = (own >= 0).astype(np.int8)
            if self.behavior.kind is BehaviorKind.CONSTRAINED:
                chosen = self._constrained_actions(position, own, observed, previous)
            else:
                naive = naive_actions(own, obs_L[:, position], obs_R[:, position], self.ell,
                                      self.config.signal)
                chosen = np.where(naive_mask[:, position], naive, autarkic)
            actions[:, position] = np.where(flips[:, position], 1 - chosen, chosen)

        return TrialBatch(
            trial_ids=trial_indices, states=states, q=np.tile(self.agent_q, (n_trials, 1)),
            signals=signals, obs_L=obs_L, obs_R=obs_R, actions=actions,
        )

    def run_trial(self, master_seed: int, trial_index: int) -> TrialRecord:
        return self.simulate(master_seed, [trial_index])[0]


def run_trial(config: TrialConfig, trial_seed: TrialSeed) -> TrialRecord:
    """Simulate one trial; trial_seed is (master seed, trial index)"""
    master_seed, trial_index = trial_seed
    return TrialSimulator(config).run_trial(master_seed, trial_index)


def _simulate_chunk(task: Tuple[TrialConfig, int, int, int]) -> TrialBatch:
    config, master_seed, start, stop = task
    return TrialSimulator(config).simulate(master_seed, range(start, stop))


def _chunks(n_trials: int, chunk_size: int, first_trial: int = 0) -> List[Tuple[int, int]]:
    stop = first_trial + n_trials
    return [(start, min(start + chunk_size, stop)) for start in range(first_trial, stop, chunk_size)]


def _iter_batches(config: TrialConfig, n_trials: int, master_seed: int, parallelism: int,
                  chunk_size: int, first_trial: int = 0) -> Iterator[TrialBatch]:
    tasks = [(config, master_seed, start, stop)
             for start, stop in _chunks(n_trials, chunk_size, first_trial)]
    if parallelism <= 1 or len(tasks) == 1:
        simulator = TrialSimulator(config)
        for _, _, start, stop in tasks:
            yield simulator.simulate(master_seed, range(start, stop))
        return
    with ProcessPoolExecutor(max_workers=parallelism) as pool:
        # map yields in submission order, so output is ordered by trial index
        for batch in pool.map(_simulate_chunk, tasks):
            yield batch


def evaluated_positions(config: TrialConfig, last_m: int = 8) -> np.ndarray:
    """0-based columns behind the per-trial 'last m' fraction correct"""
    if isinstance(config.topology, IndependentTopology):
        return np.arange(config.topology.n_initial, config.n_agents)
    return np.arange(max(config.n_agents - last_m, 0), config.n_agents)


def run_batch(config: TrialConfig, n_trials: int, master_seed: int, parallelism: int = 1,
              chunk_size: int = DEFAULT_CHUNK_SIZE, sink: Optional[Union[str, Path]] = None,
              keep_records: bool = True, last_m: int = 8, sink_append: bool = False,
              first_trial: int = 0) -> Tuple[BatchSummary, Optional[TrialBatch]]:
    """
    Simulate n_trials trials and summarize them in one pass

    Records are appended to `sink` chunk by chunk when it is given; with
    keep_records=False nothing but the summary is held in memory. Trial indices
    run from first_trial, so batches with distinct offsets share no random streams.
    """
    if n_trials < 1:
        raise ParameterError(f"n_trials must be at least 1, got {n_trials}")
    if parallelism < 1:
        raise ParameterError(f"parallelism must be at least 1, got {parallelism}")

    TrialSimulator(config)  # fail fast on an unusable configuration
    columns = evaluated_positions(config, last_m)
    correct_counts = np.zeros(config.n_agents)
    last_fractions: List[np.ndarray] = []
    overall_fractions: List[np.ndarray] = []
    kept: List[TrialBatch] = []

    batches = _iter_batches(config, n_trials, master_seed, parallelism, chunk_size, first_trial)
    for chunk_index, batch in enumerate(batches):
        correct = batch.correct
        correct_counts += correct.sum(axis=0)
        last_fractions.append(correct[:, columns].mean(axis=1))
        overall_fractions.append(correct.mean(axis=1))
        if sink is not None:
            write_records(batch, sink, append=sink_append or chunk_index > 0)
        if keep_records:
            kept.append(batch)
        logger.debug("chunk %d: trials %d..%d", chunk_index, batch.trial_ids[0], batch.trial_ids[-1])

    accuracy = correct_counts / n_trials
    summary = BatchSummary(
        n_trials=n_trials,
        accuracy=accuracy,
        standard_errors=np.sqrt(accuracy * (1.0 - accuracy) / n_trials),
        fraction_correct_last=np.concatenate(last_fractions),
        fraction_correct_overall=np.concatenate(overall_fractions),
        agent_q=config.topology.agent_q(),
        last_m=len(columns),
    )
    logger.info("simulated %d trials (%s, %s): %s", n_trials, type(config.topology).__name__,
                config.behavior, summary)
    return summary, (TrialBatch.concat(kept) if keep_records else None)


def sequential_config(q: float, n_agents: int = 40, **kwargs) -> TrialConfig:
    """TrialConfig for a sequential network with link probability q"""
    return TrialConfig(topology=SequentialTopology(NetworkParams(q=q, n_agents=n_agents)), **kwargs)
