"""
SocLearn - Naive Exact Solver
Recursive action-count distributions and per-position accuracy of naive agents
on Bernoulli(q) observation networks
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import special

from .environment import std_normal_cdf, std_normal_pdf
from .exceptions import CalibrationError, ParameterError
from .models import (
    DEFAULT_CHOICE_VARIANT, DEFAULT_ELL_VARIANT, AccuracyCurve, ChoiceProbVariant,
    CountDistribution, EllVariant, NetworkParams, ObservedCounts, SignalParams, State
)

logger = logging.getLogger(__name__)

MAX_EXACT_AGENTS = 200

# Published accuracy of naive agents 33-40 (mu=1, sigma=2, 40 agents)
PUBLISHED_POSITIONS = tuple(range(33, 41))
PUBLISHED_NAIVE_ACCURACY: Dict[float, Tuple[float, ...]] = {
    0.25: (0.8773, 0.8780, 0.8786, 0.8792, 0.8797, 0.8801, 0.8805, 0.8808),
    0.75: (0.7768,) * 8,
}


def binomial_pmf(n: int, q: float) -> np.ndarray:
    """B(i, n, q) for i = 0..n, through log-gamma so large n does not overflow"""
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"link probability q must be in [0, 1], got {q}")
    pmf = np.zeros(n + 1)
    if q == 0.0:
        pmf[0] = 1.0
        return pmf
    if q == 1.0:
        pmf[n] = 1.0
        return pmf
    i = np.arange(n + 1)
    log_choose = special.gammaln(n + 1) - special.gammaln(i + 1) - special.gammaln(n - i + 1)
    return np.exp(log_choose + i * np.log(q) + (n - i) * np.log1p(-q))


def compute_ell(params: SignalParams, variant: EllVariant) -> float:
    """Log-likelihood increment a naive agent assigns to one observed R action"""
    mu, sigma = params.mu, params.sigma
    tail = 1.0 - std_normal_cdf(-mu / sigma)
    density = std_normal_pdf(-mu / sigma)
    if variant is EllVariant.PRINTED_FORMULA:
        ell = (2.0 / sigma ** 2) * (mu + sigma * density) / tail
    elif variant is EllVariant.TRUNCATED_MEAN:
        ell = (2.0 / sigma ** 2) * (mu + sigma * density / tail)
    elif variant is EllVariant.EXACT_BINARY:
        ell = np.log(std_normal_cdf(mu / sigma) / std_normal_cdf(-mu / sigma))
    else:
        raise ParameterError(f"unknown ell variant {variant}")
    return float(ell)


def _choice_prob_L_by_difference(difference: np.ndarray, ell: float, params: SignalParams,
                                 variant: ChoiceProbVariant, state: State = State.R,
                                 naive_share: float = 1.0, epsilon: float = 0.0) -> np.ndarray:
    """P(choose L | observed L-count minus R-count, state), vectorized over the difference"""
    mu, sigma = params.mu, params.sigma
    d = np.asarray(difference, dtype=float)
    if variant is ChoiceProbVariant.DERIVED_ARGUMENT:
        threshold = d * ell * sigma ** 2 / (2.0 * mu)
        naive = std_normal_cdf((threshold - params.mean(state)) / sigma)
    elif variant is ChoiceProbVariant.PRINTED_ARGUMENT:
        if state is State.R:
            naive = std_normal_cdf((sigma * d * ell - 2.0 * mu * sigma) / 2.0)
        else:
            naive = 1.0 - std_normal_cdf((-sigma * d * ell - 2.0 * mu * sigma) / 2.0)
    else:
        raise ParameterError(f"unknown choice-probability variant {variant}")
    autarkic = std_normal_cdf(-params.mean(state) / sigma)
    chose_L = naive_share * naive + (1.0 - naive_share) * autarkic
    return (1.0 - epsilon) * chose_L + epsilon * (1.0 - chose_L)


def choice_prob_L(counts: ObservedCounts, ell: float, params: SignalParams,
                  variant: ChoiceProbVariant) -> float:
    """Probability that a naive agent with these observations chooses L in state R"""
    if not ell > 0:
        raise ParameterError(f"ell must be positive, got {ell}")
    return float(_choice_prob_L_by_difference(np.array(counts.difference), ell, params, variant))


def _entering_agent_choice_L(dist: CountDistribution, q: float, ell: float, params: SignalParams,
                             variant: ChoiceProbVariant, state: State,
                             naive_share: float, epsilon: float) -> np.ndarray:
    """
    For each k, probability that agent n + 1 chooses L when k predecessors chose L

    The observed counts are independent Binomial(k, q) and Binomial(n - k, q); only
    their difference matters, whose law is the convolution of the two pmfs.
    """
    n = dist.n
    chose_L = np.zeros(n + 1)
    for k in range(n + 1):
        pmf_L = binomial_pmf(k, q)
        pmf_R = binomial_pmf(n - k, q)
        # index j of the convolution is difference j - (n - k)
        diff_pmf = np.convolve(pmf_L, pmf_R[::-1])
        differences = np.arange(-(n - k), k + 1)
        probs = _choice_prob_L_by_difference(differences, ell, params, variant, state,
                                             naive_share, epsilon)
        chose_L[k] = np.dot(diff_pmf, probs)
    return chose_L


def _advance(dist: CountDistribution, chose_L: np.ndarray) -> CountDistribution:
    probs = np.zeros(dist.n + 2)
    probs[1:] += dist.probs * chose_L
    probs[:-1] += dist.probs * (1.0 - chose_L)
    return CountDistribution(n=dist.n + 1, probs=probs)


def step_distribution(dist: CountDistribution, q: float, ell: float, params: SignalParams,
                      variant: ChoiceProbVariant, state: State = State.R,
                      naive_share: float = 1.0, epsilon: float = 0.0) -> CountDistribution:
    """Distribution over (L, R) counts after one more naive agent acts"""
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"link probability q must be in [0, 1], got {q}")
    chose_L = _entering_agent_choice_L(dist, q, ell, params, variant, state, naive_share, epsilon)
    return _advance(dist, chose_L)


def naive_accuracy_curve(net: NetworkParams, params: SignalParams,
                         ell_variant: EllVariant = DEFAULT_ELL_VARIANT,
                         choice_variant: ChoiceProbVariant = DEFAULT_CHOICE_VARIANT,
                         naive_share: float = 1.0, epsilon: float = 0.0,
                         state: State = State.R) -> AccuracyCurve:
    """
    Probability that each of the n agents chooses the correct action

    Conditions on `state` throughout; by symmetry of the signal model this is also
    the unconditional accuracy for the derived choice probabilities.
    """
    if net.n_agents > MAX_EXACT_AGENTS:
        raise ParameterError(
            f"exact recursion supports at most {MAX_EXACT_AGENTS} agents, got {net.n_agents}"
        )
    if not 0.0 <= naive_share <= 1.0 or not 0.0 <= epsilon <= 1.0:
        raise ParameterError("naive_share and epsilon must be in [0, 1]")

    ell = compute_ell(params, ell_variant)
    dist = CountDistribution.initial()
    values = np.zeros(net.n_agents)
    for index in range(net.n_agents):
        chose_L = _entering_agent_choice_L(dist, net.q, ell, params, choice_variant, state,
                                           naive_share, epsilon)
        correct = chose_L if state is State.L else 1.0 - chose_L
        values[index] = float(np.dot(dist.probs, correct))
        dist = _advance(dist, chose_L)

    logger.debug("naive curve q=%s %s/%s: last=%.6f, mass=%.12f", net.q,
                 ell_variant.value, choice_variant.value, values[-1], dist.total())
    return AccuracyCurve(values=values, q=net.q, model="naive",
                         label=f"{ell_variant.value}/{choice_variant.value}")


def crossover_positions(sparse: AccuracyCurve, dense: AccuracyCurve, start: int = 2) -> List[int]:
    """Positions p where dense - sparse has a different sign than at p - 1"""
    gap = dense.values[start - 1:] - sparse.values[start - 1:]
    signs = np.sign(gap)
    nonzero = np.flatnonzero(signs)
    crossings = []
    for previous, current in zip(nonzero[:-1], nonzero[1:]):
        if signs[current] != signs[previous]:
            crossings.append(int(current) + start)
    return crossings


@dataclass
class CalibrationEntry:
    ell_variant: EllVariant
    choice_variant: ChoiceProbVariant
    ell: float
    max_deviation: float
    deviations: Dict[float, List[float]]

    @property
    def pair(self) -> Tuple[EllVariant, ChoiceProbVariant]:
        return self.ell_variant, self.choice_variant


@dataclass
class CalibrationReport:
    """Deviation of every formula variant pair from the published table"""
    params: SignalParams
    tolerance: float
    entries: List[CalibrationEntry] = field(default_factory=list)

    @property
    def best(self) -> CalibrationEntry:
        return min(self.entries, key=lambda entry: entry.max_deviation)

    def to_dict(self) -> Dict[str, object]:
        best = self.best
        return {
            "mu": self.params.mu,
            "sigma": self.params.sigma,
            "tolerance": self.tolerance,
            "positions": list(PUBLISHED_POSITIONS),
            "selected": {"ell_variant": best.ell_variant.value,
                         "choice_variant": best.choice_variant.value,
                         "max_deviation": best.max_deviation},
            "pairs": [
                {
                    "ell_variant": entry.ell_variant.value,
                    "choice_variant": entry.choice_variant.value,
                    "ell": entry.ell,
                    "max_deviation": entry.max_deviation,
                    "deviations": {str(q): devs for q, devs in sorted(entry.deviations.items())},
                }
                for entry in self.entries
            ],
        }


class VariantCalibrator:
    """
    Picks the (ell, choice-probability) reading that reproduces the published naive table

    Every pair is evaluated on both published densities; the pair with the smallest
    maximum absolute deviation wins, and no pair under `tolerance` is an error.
    """

    def __init__(self, params: SignalParams, n_agents: int = 40,
                 targets: Optional[Dict[float, Sequence[float]]] = None,
                 positions: Sequence[int] = PUBLISHED_POSITIONS,
                 tolerance: float = 0.01, max_workers: int = 1):
        self.params = params
        self.n_agents = n_agents
        self.targets = dict(targets if targets is not None else PUBLISHED_NAIVE_ACCURACY)
        self.positions = list(positions)
        self.tolerance = tolerance
        self.max_workers = max_workers

    def _evaluate(self, pair: Tuple[EllVariant, ChoiceProbVariant]) -> CalibrationEntry:
        ell_variant, choice_variant = pair
        deviations: Dict[float, List[float]] = {}
        for q, published in sorted(self.targets.items()):
            curve = naive_accuracy_curve(NetworkParams(q=q, n_agents=self.n_agents), self.params,
                                         ell_variant, choice_variant)
            deviations[q] = [abs(curve.at(p) - target) for p, target in zip(self.positions, published)]
        worst = max(max(devs) for devs in deviations.values())
        return CalibrationEntry(ell_variant, choice_variant, compute_ell(self.params, ell_variant),
                                worst, deviations)

    def calibrate(self) -> CalibrationReport:
        pairs = list(product(EllVariant, ChoiceProbVariant))
        if self.max_workers > 1:
            with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
                entries = list(pool.map(self._evaluate, pairs))
        else:
            entries = [self._evaluate(pair) for pair in pairs]

        report = CalibrationReport(params=self.params, tolerance=self.tolerance, entries=entries)
        for entry in entries:
            logger.info("calibration %s/%s: max deviation %.6f", entry.ell_variant.value,
                        entry.choice_variant.value, entry.max_deviation)

        best = report.best
        if not best.max_deviation < self.tolerance:
            raise CalibrationError(
                f"no variant pair reproduces the published naive accuracies within {self.tolerance}; "
                f"best is {best.ell_variant.value}/{best.choice_variant.value} "
                f"with max deviation {best.max_deviation:.6f}",
                best_pair=(best.ell_variant.value, best.choice_variant.value),
                best_deviation=best.max_deviation,
            )
        logger.info("selected %s/%s", best.ell_variant.value, best.choice_variant.value)
        return report


def calibrate_variants(params: SignalParams) -> Tuple[EllVariant, ChoiceProbVariant]:
    """Variant pair that best reproduces the published naive accuracy table"""
    return VariantCalibrator(params).calibrate().best.pair
