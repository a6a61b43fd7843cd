"""
SocLearn - Rational Bound
Accuracy of constrained one-neighbor strategy profiles, which bound the accuracy
of rational agents from below
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from .environment import autarky_accuracy, std_normal_cdf
from .exceptions import ParameterError, ReproductionError
from .models import BoundCurve, NeighborRule, NetworkParams, SignalParams, State

logger = logging.getLogger(__name__)

# Published lower bounds for agents 33-40 on the dense network (mu=1, sigma=2)
PUBLISHED_BOUND_POSITIONS = tuple(range(33, 41))
PUBLISHED_RATIONAL_BOUND: Dict[float, Tuple[float, ...]] = {
    0.75: (0.9685, 0.9695, 0.9705, 0.9714, 0.9723, 0.9731, 0.9739, 0.9746),
}
PUBLISHED_BOUND_PARAMS = SignalParams(mu=1.0, sigma=2.0)

# Cut-offs searched by the joint rule, in signal standard deviations
CUTOFF_LIMIT = 25.0


def neighbor_distribution(agent: int, q: float) -> Tuple[np.ndarray, float]:
    """
    Law of the most recent predecessor that `agent` observes

    Returns (weights, none) where weights[j - 1] is the probability that j is the most
    recent observed predecessor and `none` the probability of observing nobody.
    """
    if agent < 1:
        raise ParameterError(f"agent index must be positive, got {agent}")
    if not 0.0 <= q <= 1.0:
        raise ParameterError(f"link probability q must be in [0, 1], got {q}")
    j = np.arange(1, agent)
    weights = q * (1.0 - q) ** (agent - 1 - j)
    return weights, (1.0 - q) ** (agent - 1)


def binary_signal_weight(p_neighbor: float) -> float:
    """Log-likelihood ratio carried by a symmetric binary signal of accuracy p"""
    return math.log(p_neighbor / (1.0 - p_neighbor))


def _clamp(p: float) -> float:
    return min(max(p, 0.5), 1.0 - 1e-16)


def combine_signal_with_binary(p_neighbor: float, params: SignalParams,
                               state: State = State.R) -> float:
    """
    Accuracy of the Bayes-optimal rule that combines the own Gaussian signal with one
    symmetric binary signal (the observed neighbor's action) of accuracy p_neighbor

    The rule picks R iff 2*mu*s/sigma^2 +/- log(p/(1-p)) > 0, evaluated here conditional
    on `state`.
    """
    if not 0.5 <= p_neighbor < 1.0:
        raise ParameterError(f"neighbor accuracy must be in [0.5, 1), got {p_neighbor}")
    mu, sigma = params.mu, params.sigma
    # signal threshold shift when the neighbor's action agrees with R
    shift = sigma ** 2 / (2.0 * mu) * binary_signal_weight(p_neighbor)
    mean = params.mean(state)
    if state is State.R:
        # neighbor correct says R: choose R iff s > -shift; neighbor wrong: s > shift
        agree = 1.0 - std_normal_cdf((-shift - mean) / sigma)
        disagree = 1.0 - std_normal_cdf((shift - mean) / sigma)
    else:
        agree = std_normal_cdf((shift - mean) / sigma)
        disagree = std_normal_cdf((-shift - mean) / sigma)
    return float(p_neighbor * agree + (1.0 - p_neighbor) * disagree)


def _identified_curve(net: NetworkParams, params: SignalParams) -> np.ndarray:
    autarky = autarky_accuracy(params)
    values = np.zeros(net.n_agents)
    combined = np.zeros(net.n_agents)
    values[0] = autarky
    for index in range(net.n_agents):
        if index > 0:
            weights, none = neighbor_distribution(index + 1, net.q)
            values[index] = float(np.dot(weights, combined[:index]) + none * autarky)
        combined[index] = combine_signal_with_binary(_clamp(values[index]), params)
    return values


def pooled_profile(net: NetworkParams, params: SignalParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Accuracy and signal cut-offs when agents see the action but not who took it

    The observed action is then a symmetric binary signal whose accuracy is the
    average over the most-recent-neighbor law. Cut-offs are (after R, after L) per agent.
    """
    autarky = autarky_accuracy(params)
    values = np.full(net.n_agents, autarky)
    cutoffs = np.zeros((net.n_agents, 2))
    for index in range(1, net.n_agents):
        weights, none = neighbor_distribution(index + 1, net.q)
        seen = 1.0 - none
        if seen <= 0.0:
            continue
        pooled = _clamp(float(np.dot(weights, values[:index])) / seen)
        values[index] = seen * combine_signal_with_binary(pooled, params) + none * autarky
        shift = params.sigma ** 2 / (2.0 * params.mu) * binary_signal_weight(pooled)
        cutoffs[index] = (-shift, shift)
    return values, cutoffs


def threshold_profile_accuracy(cutoffs: np.ndarray, net: NetworkParams,
                               params: SignalParams) -> BoundCurve:
    """
    Per-position accuracy of an arbitrary cut-off profile

    Agent i picks R iff its signal exceeds cutoffs[i, 0] after an observed R,
    cutoffs[i, 1] after an observed L, and 0 when it observes nobody. Cut-offs may be
    asymmetric, so R and L rates are tracked separately and averaged at the end.
    """
    cutoffs = np.asarray(cutoffs, dtype=float)
    if cutoffs.shape != (net.n_agents, 2):
        raise ParameterError(f"cutoffs must have shape ({net.n_agents}, 2), got {cutoffs.shape}")
    mu, sigma = params.mu, params.sigma
    rise_R = std_normal_cdf((mu - cutoffs) / sigma)
    rise_L = std_normal_cdf((-mu - cutoffs) / sigma)
    alone_R, alone_L = std_normal_cdf(mu / sigma), std_normal_cdf(-mu / sigma)

    says_R_in_R = np.zeros(net.n_agents)
    says_R_in_L = np.zeros(net.n_agents)
    for index in range(net.n_agents):
        weights, none = neighbor_distribution(index + 1, net.q)
        prior_R, prior_L = says_R_in_R[:index], says_R_in_L[:index]
        after_R, after_L = rise_R[index]
        says_R_in_R[index] = np.dot(weights, prior_R * after_R + (1.0 - prior_R) * after_L) + none * alone_R
        after_R, after_L = rise_L[index]
        says_R_in_L[index] = np.dot(weights, prior_L * after_R + (1.0 - prior_L) * after_L) + none * alone_L

    values = 0.5 * (says_R_in_R + 1.0 - says_R_in_L)
    return BoundCurve(values=values, q=net.q, label="one-neighbor/threshold-profile")


def optimize_threshold_profile(net: NetworkParams, params: SignalParams,
                               target: Optional[int] = None,
                               maxiter: int = 200) -> Tuple[np.ndarray, BoundCurve]:
    """
    Cut-offs of agents 1..target chosen jointly to maximize agent target's accuracy

    Starts from the pooled profile and never returns a worse one. Agents after
    `target` keep their pooled cut-offs.
    """
    target = net.n_agents if target is None else target
    if not 1 <= target <= net.n_agents:
        raise ParameterError(f"target must be in 1..{net.n_agents}, got {target}")
    _, start = pooled_profile(net, params)
    head = NetworkParams(q=net.q, n_agents=target)

    def objective(x: np.ndarray) -> float:
        return -float(threshold_profile_accuracy(x.reshape(target, 2), head, params).values[-1])

    x0 = start[:target].ravel()
    limit = CUTOFF_LIMIT * params.sigma
    result = optimize.minimize(objective, x0, method="L-BFGS-B",
                               bounds=[(-limit, limit)] * len(x0), options={"maxiter": maxiter})
    best = result.x if result.fun < objective(x0) else x0

    cutoffs = start.copy()
    cutoffs[:target] = best.reshape(target, 2)
    curve = threshold_profile_accuracy(cutoffs, net, params)
    logger.debug("joint profile q=%s target=%d: %.6f after %d iterations", net.q, target,
                 curve.at(target), result.nit)
    return cutoffs, BoundCurve(values=curve.values, q=net.q, label="one-neighbor/joint")


def constrained_accuracy_curve(net: NetworkParams, params: SignalParams,
                               rule: NeighborRule = NeighborRule.IDENTIFIED,
                               target: Optional[int] = None) -> BoundCurve:
    """
    Per-position accuracy when every agent acts on its own signal and the action of
    its most recent observed predecessor

    IDENTIFIED agents best-respond knowing which predecessor they see; POOLED agents
    only see the action; JOINT cut-offs are optimized for agent `target` (default: last).
    """
    if rule is NeighborRule.IDENTIFIED:
        values = _identified_curve(net, params)
    elif rule is NeighborRule.POOLED:
        values, _ = pooled_profile(net, params)
    elif rule is NeighborRule.JOINT:
        return optimize_threshold_profile(net, params, target)[1]
    else:
        raise ParameterError(f"unknown neighbor rule {rule}")
    logger.debug("constrained curve q=%s %s: last=%.6f", net.q, rule.value, values[-1])
    return BoundCurve(values=values, q=net.q, label=f"one-neighbor/{rule.value}")


@dataclass
class BoundReconstructionEntry:
    rule: NeighborRule
    values: Dict[float, List[float]]
    deviations: Dict[float, List[float]]
    max_deviation: float


@dataclass
class BoundReconstructionReport:
    """Deviation of every constrained-profile rule from the published bound table"""
    params: SignalParams
    tolerance: float
    positions: List[int]
    entries: List[BoundReconstructionEntry] = field(default_factory=list)

    @property
    def best(self) -> BoundReconstructionEntry:
        return min(self.entries, key=lambda entry: entry.max_deviation)

    @property
    def reproduces(self) -> bool:
        return self.best.max_deviation < self.tolerance

    def to_dict(self) -> Dict[str, object]:
        best = self.best
        return {
            "mu": self.params.mu,
            "sigma": self.params.sigma,
            "tolerance": self.tolerance,
            "positions": self.positions,
            "reproduces_published": self.reproduces,
            "selected": {"rule": best.rule.value, "max_deviation": best.max_deviation},
            "rules": [
                {
                    "rule": entry.rule.value,
                    "max_deviation": entry.max_deviation,
                    "values": {str(q): values for q, values in sorted(entry.values.items())},
                    "deviations": {str(q): devs for q, devs in sorted(entry.deviations.items())},
                }
                for entry in self.entries
            ],
        }


class BoundReconstruction:
    """
    Checks constrained-profile rules against the published lower-bound table

    A rule reproduces the table when every published position is within `tolerance`.
    evaluate() reports and warns; verify() raises ReproductionError instead.
    """

    def __init__(self, params: SignalParams = PUBLISHED_BOUND_PARAMS, n_agents: int = 40,
                 targets: Optional[Dict[float, Sequence[float]]] = None,
                 positions: Sequence[int] = PUBLISHED_BOUND_POSITIONS,
                 tolerance: float = 1e-3, rules: Sequence[NeighborRule] = tuple(NeighborRule)):
        self.params = params
        self.n_agents = n_agents
        self.targets = dict(targets if targets is not None else PUBLISHED_RATIONAL_BOUND)
        self.positions = list(positions)
        self.tolerance = tolerance
        self.rules = list(rules)

    def _evaluate(self, rule: NeighborRule) -> BoundReconstructionEntry:
        values: Dict[float, List[float]] = {}
        deviations: Dict[float, List[float]] = {}
        for q, published in sorted(self.targets.items()):
            curve = constrained_accuracy_curve(NetworkParams(q=q, n_agents=self.n_agents), self.params,
                                               rule, target=max(self.positions))
            values[q] = [curve.at(p) for p in self.positions]
            deviations[q] = [abs(value - target) for value, target in zip(values[q], published)]
        worst = max(max(devs) for devs in deviations.values())
        return BoundReconstructionEntry(rule, values, deviations, worst)

    def evaluate(self) -> BoundReconstructionReport:
        report = BoundReconstructionReport(params=self.params, tolerance=self.tolerance,
                                           positions=self.positions,
                                           entries=[self._evaluate(rule) for rule in self.rules])
        for entry in report.entries:
            logger.info("bound rule %s: max deviation %.6f", entry.rule.value, entry.max_deviation)
        if not report.reproduces:
            best = report.best
            logger.warning("no constrained one-neighbor rule reproduces the published bound table "
                           "within %g; closest is %s, off by %.4f", self.tolerance,
                           best.rule.value, best.max_deviation)
        return report

    def verify(self, report: Optional[BoundReconstructionReport] = None) -> BoundReconstructionReport:
        report = report if report is not None else self.evaluate()
        if not report.reproduces:
            best = report.best
            raise ReproductionError(
                f"no constrained one-neighbor rule reproduces the published bound table within "
                f"{self.tolerance}; closest is {best.rule.value} with max deviation "
                f"{best.max_deviation:.6f}",
                best_rule=best.rule.value, best_deviation=best.max_deviation,
            )
        return report


def has_published_bound(params: SignalParams, n_agents: int) -> bool:
    """Whether the published bound table describes this environment"""
    return params == PUBLISHED_BOUND_PARAMS and n_agents >= max(PUBLISHED_BOUND_POSITIONS)
