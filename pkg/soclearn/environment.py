"""
SocLearn - Learning Environment
Gaussian utilities, seeded sampling of signals and networks, and the naive decision rule
"""

import math
from enum import IntEnum
from typing import Union

import numpy as np
from scipy import special

from .models import NetworkParams, NetworkRealization, ObservedCounts, SignalParams, State
from .exceptions import ParameterError

ArrayLike = Union[float, np.ndarray]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class DrawPurpose(IntEnum):
    """Independent random streams inside one trial"""
    STATE = 0
    SIGNAL = 1
    LINK = 2
    BEHAVIOR = 3
    NOISE = 4


def std_normal_cdf(x: ArrayLike) -> ArrayLike:
    """Standard Gaussian distribution function (Cephes ndtr, erfc-based in the tails)"""
    return special.ndtr(x)


def std_normal_pdf(x: ArrayLike) -> ArrayLike:
    """Standard Gaussian density"""
    return _INV_SQRT_2PI * np.exp(-0.5 * np.square(x))


def signal_loglik_ratio(s: ArrayLike, params: SignalParams) -> ArrayLike:
    """log f(s | R) / f(s | L) for the Gaussian signal model"""
    return 2.0 * params.mu * s / params.sigma ** 2


def autarky_accuracy(params: SignalParams) -> float:
    """Accuracy of following the sign of the own signal"""
    return float(std_normal_cdf(params.mu / params.sigma))


def derive_seed_sequence(master_seed: int, trial_index: int, purpose: DrawPurpose) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(trial_index), int(purpose)))


def derive_rng(master_seed: int, trial_index: int, purpose: DrawPurpose) -> np.random.Generator:
    """
    Random stream for one draw purpose of one trial

    A pure function of (master seed, trial index, purpose), so a trial produces the
    same draws no matter which worker runs it or in which order.
    """
    return np.random.default_rng(derive_seed_sequence(master_seed, trial_index, purpose))


def sample_state(rng: np.random.Generator) -> State:
    return State(int(rng.integers(0, 2)))


def sample_link_matrix(n_agents: int, q: ArrayLike, rng: np.random.Generator) -> np.ndarray:
    """
    Boolean n x n matrix, links[i, j] means agent i + 1 observes agent j + 1

    Draws one uniform per ordered pair; only the strictly lower triangle can be set.
    q may be a scalar or a per-observer vector.
    """
    uniforms = rng.random((n_agents, n_agents))
    q_rows = np.broadcast_to(np.asarray(q, dtype=float).reshape(-1, 1), (n_agents, 1))
    return np.tril(uniforms < q_rows, k=-1)


def sample_network(params: NetworkParams, rng: np.random.Generator) -> NetworkRealization:
    """Draw each predecessor link independently with probability q"""
    links = sample_link_matrix(params.n_agents, params.q, rng)
    neighbors = tuple(tuple(int(j) + 1 for j in np.flatnonzero(row)) for row in links)
    return NetworkRealization(neighbors=neighbors)


def sample_signal(state: State, params: SignalParams, rng: np.random.Generator) -> float:
    return float(params.mean(state) + params.sigma * rng.standard_normal())


def sample_signals(state: State, params: SignalParams, rng: np.random.Generator, size: int) -> np.ndarray:
    """Element i is the signal of agent i + 1"""
    return params.mean(state) + params.sigma * rng.standard_normal(size)


def naive_posterior(s: float, counts: ObservedCounts, ell: float, params: SignalParams) -> float:
    """Naive log-likelihood ratio of R: own signal plus ell per net observed R action"""
    return float(signal_loglik_ratio(s, params) + (counts.i_prime - counts.i) * ell)


def naive_decide(s: float, counts: ObservedCounts, ell: float, params: SignalParams) -> State:
    """
    Action of an agent who treats every observed action as a bare private signal

    Exact posterior ties follow the sign of the own signal, and s == 0 picks R.
    """
    if not ell > 0:
        raise ParameterError(f"ell must be positive, got {ell}")
    posterior = naive_posterior(s, counts, ell, params)
    if posterior > 0:
        return State.R
    if posterior < 0:
        return State.L
    return State.R if s >= 0 else State.L


def naive_actions(signals: np.ndarray, obs_L: np.ndarray, obs_R: np.ndarray,
                  ell: float, params: SignalParams) -> np.ndarray:
    """Vectorized naive_decide, returning State values (0 = L, 1 = R)"""
    posterior = signal_loglik_ratio(signals, params) + (obs_R - obs_L) * ell
    tie_break = signals >= 0
    return np.where(posterior > 0, True, np.where(posterior < 0, False, tie_break)).astype(np.int8)
