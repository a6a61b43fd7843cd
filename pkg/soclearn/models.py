"""
SocLearn - Data Models
Defines core data structures for the social-learning solver, simulator and analytics
"""

import math
from enum import Enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from .exceptions import ParameterError


class State(Enum):
    """Binary state of the world; the prior over states is uniform"""
    L = 0
    R = 1

    @property
    def opposite(self) -> "State":
        return State.R if self is State.L else State.L

    @classmethod
    def from_label(cls, label: Union[str, int]) -> "State":
        """Parse 'L'/'R' (any case) or 0/1"""
        if isinstance(label, str):
            return cls[label.strip().upper()]
        return cls(int(label))


@dataclass(frozen=True)
class SignalParams:
    """Gaussian private signals: N(+mu, sigma^2) in state R, N(-mu, sigma^2) in state L"""
    mu: float = 1.0
    sigma: float = 2.0

    def __post_init__(self):
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ParameterError(f"mu must be a finite positive number, got {self.mu}")
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise ParameterError(f"sigma must be a finite positive number, got {self.sigma}")

    def mean(self, state: State) -> float:
        return self.mu if state is State.R else -self.mu


@dataclass(frozen=True)
class NetworkParams:
    """i.i.d. Bernoulli(q) observation links over n_agents ordered agents"""
    q: float = 0.25
    n_agents: int = 40

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0:
            raise ParameterError(f"link probability q must be in [0, 1], got {self.q}")
        if int(self.n_agents) != self.n_agents or self.n_agents < 1:
            raise ParameterError(f"n_agents must be a positive integer, got {self.n_agents}")


@dataclass(frozen=True)
class NetworkRealization:
    """Observed-predecessor sets, neighbors[i - 1] belongs to agent i (1-based)"""
    neighbors: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        for index, observed in enumerate(self.neighbors, start=1):
            if any(j < 1 or j >= index for j in observed):
                raise ParameterError(
                    f"agent {index} lists a neighbor that is not an earlier agent: {observed}"
                )

    @property
    def n_agents(self) -> int:
        return len(self.neighbors)

    def of(self, agent: int) -> Tuple[int, ...]:
        return self.neighbors[agent - 1]

    def link_count(self) -> int:
        return sum(len(observed) for observed in self.neighbors)


class BehaviorKind(Enum):
    """How an agent maps its signal and observations to an action"""
    NAIVE = "naive"
    AUTARKIC = "autarkic"
    MIXED = "mixed"
    INDEPENDENT_OBSERVED = "independent"
    CONSTRAINED = "constrained"


@dataclass(frozen=True)
class BehaviorModel:
    """
    Behavior of the simulated population

    naive_share only matters for MIXED (each agent is naive with that probability,
    autarkic otherwise). epsilon is a uniform action-flip rate applied after the decision.
    """
    kind: BehaviorKind = BehaviorKind.NAIVE
    naive_share: float = 1.0
    epsilon: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.naive_share <= 1.0:
            raise ParameterError(f"naive_share must be in [0, 1], got {self.naive_share}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ParameterError(f"epsilon must be in [0, 1], got {self.epsilon}")

    @classmethod
    def naive(cls) -> "BehaviorModel":
        return cls(BehaviorKind.NAIVE)

    @classmethod
    def autarkic(cls) -> "BehaviorModel":
        return cls(BehaviorKind.AUTARKIC)

    @classmethod
    def mixed(cls, naive_share: float, epsilon: float = 0.0) -> "BehaviorModel":
        return cls(BehaviorKind.MIXED, naive_share=naive_share, epsilon=epsilon)

    @property
    def effective_naive_share(self) -> float:
        if self.kind is BehaviorKind.AUTARKIC:
            return 0.0
        if self.kind is BehaviorKind.MIXED:
            return self.naive_share
        return 1.0

    def __str__(self) -> str:
        if self.kind is BehaviorKind.MIXED:
            return f"mixed(naive_share={self.naive_share}, epsilon={self.epsilon})"
        if self.epsilon:
            return f"{self.kind.value}(epsilon={self.epsilon})"
        return self.kind.value


@dataclass(frozen=True)
class ObservedCounts:
    """Observed predecessor actions: i chose L, i_prime chose R"""
    i: int = 0
    i_prime: int = 0

    def __post_init__(self):
        if self.i < 0 or self.i_prime < 0:
            raise ParameterError(f"observed counts must be nonnegative, got ({self.i}, {self.i_prime})")

    @property
    def difference(self) -> int:
        """L-count minus R-count"""
        return self.i - self.i_prime


class EllVariant(Enum):
    """Readings of the log-likelihood increment a naive agent assigns to one observed action"""
    PRINTED_FORMULA = "printed"
    TRUNCATED_MEAN = "truncated"
    EXACT_BINARY = "exact"


class ChoiceProbVariant(Enum):
    """Readings of the probability that a naive agent chooses L given its observations"""
    PRINTED_ARGUMENT = "printed"
    DERIVED_ARGUMENT = "derived"


# The pair that reproduces the published naive table for mu=1, sigma=2
DEFAULT_ELL_VARIANT = EllVariant.TRUNCATED_MEAN
DEFAULT_CHOICE_VARIANT = ChoiceProbVariant.DERIVED_ARGUMENT


class NeighborRule(Enum):
    """What a constrained agent knows about the single action it conditions on"""
    IDENTIFIED = "identified"  # which predecessor acted, so its accuracy
    POOLED = "pooled"  # only the action, averaged over who the neighbor may be
    JOINT = "joint"  # per-agent asymmetric cut-offs chosen jointly for a target agent


@dataclass
class CountDistribution:
    """
    P(k, k') over the first n agents, conditional on one state

    probs[k] is the probability that k agents chose L and n - k chose R.
    """
    n: int
    probs: np.ndarray

    def __post_init__(self):
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (self.n + 1,):
            raise ParameterError(
                f"count distribution for n={self.n} needs {self.n + 1} entries, got {self.probs.shape}"
            )

    @classmethod
    def initial(cls) -> "CountDistribution":
        return cls(n=0, probs=np.ones(1))

    def prob(self, k: int, k_prime: int) -> float:
        if k < 0 or k_prime < 0 or k + k_prime != self.n:
            return 0.0
        return float(self.probs[k])

    def total(self) -> float:
        return float(math.fsum(self.probs))


@dataclass
class AccuracyCurve:
    """Per-position probability that the agent's action equals the state"""
    values: np.ndarray
    q: float
    model: str = "naive"
    label: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)

    def __len__(self) -> int:
        return len(self.values)

    def at(self, position: int) -> float:
        """Accuracy of the agent at a 1-based position"""
        return float(self.values[position - 1])

    def positions(self) -> np.ndarray:
        return np.arange(1, len(self.values) + 1)

    def __str__(self) -> str:
        return (
            f"AccuracyCurve(model={self.model}, q={self.q}, n={len(self)}, "
            f"last={self.values[-1]:.4f})"
        )


@dataclass
class BoundCurve(AccuracyCurve):
    """Accuracy of the optimal constrained one-neighbor profile, a lower bound for rational agents"""
    model: str = "rational-bound"

    def is_monotone(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.diff(self.values) >= -tol))


@dataclass(frozen=True)
class SequentialTopology:
    """All agents act in order on one Bernoulli(q) network"""
    network: NetworkParams = field(default_factory=NetworkParams)

    @property
    def n_agents(self) -> int:
        return self.network.n_agents

    def agent_q(self) -> np.ndarray:
        return np.full(self.n_agents, self.network.q)


@dataclass(frozen=True)
class IndependentTopology:
    """
    Initial agents without neighbors, then two evaluator arms that observe only
    the initial agents, each with its own link probability, and never each other
    """
    n_initial: int = 32
    n_sparse_evaluators: int = 8
    n_dense_evaluators: int = 8
    q_sparse: float = 0.25
    q_dense: float = 0.75

    def __post_init__(self):
        for name in ("n_initial", "n_sparse_evaluators", "n_dense_evaluators"):
            if getattr(self, name) < 1:
                raise ParameterError(f"{name} must be positive")
        for name in ("q_sparse", "q_dense"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ParameterError(f"{name} must be in [0, 1]")

    @property
    def n_agents(self) -> int:
        return self.n_initial + self.n_sparse_evaluators + self.n_dense_evaluators

    def sparse_positions(self) -> range:
        start = self.n_initial + 1
        return range(start, start + self.n_sparse_evaluators)

    def dense_positions(self) -> range:
        start = self.n_initial + self.n_sparse_evaluators + 1
        return range(start, start + self.n_dense_evaluators)

    def agent_q(self) -> np.ndarray:
        q = np.zeros(self.n_agents)
        q[self.n_initial:self.n_initial + self.n_sparse_evaluators] = self.q_sparse
        q[self.n_initial + self.n_sparse_evaluators:] = self.q_dense
        return q


Topology = Union[SequentialTopology, IndependentTopology]


@dataclass(frozen=True)
class TrialConfig:
    """Everything one simulated trial needs besides its seed"""
    topology: Topology = field(default_factory=SequentialTopology)
    signal: SignalParams = field(default_factory=SignalParams)
    behavior: BehaviorModel = field(default_factory=BehaviorModel)
    ell_variant: EllVariant = DEFAULT_ELL_VARIANT
    choice_variant: ChoiceProbVariant = DEFAULT_CHOICE_VARIANT

    @property
    def n_agents(self) -> int:
        return self.topology.n_agents

    @property
    def is_sequential(self) -> bool:
        return isinstance(self.topology, SequentialTopology)


@dataclass
class TrialRecord:
    """One trial: per-agent arrays indexed by position - 1"""
    trial_id: int
    state: State
    q: np.ndarray
    signals: np.ndarray
    obs_L: np.ndarray
    obs_R: np.ndarray
    actions: np.ndarray

    @property
    def n_agents(self) -> int:
        return len(self.actions)

    @property
    def correct(self) -> np.ndarray:
        return self.actions == self.state.value

    def action(self, position: int) -> State:
        return State(int(self.actions[position - 1]))

    def counts(self, position: int) -> ObservedCounts:
        return ObservedCounts(int(self.obs_L[position - 1]), int(self.obs_R[position - 1]))

    def __str__(self) -> str:
        return (
            f"TrialRecord(trial={self.trial_id}, state={self.state.name}, "
            f"correct={int(self.correct.sum())}/{self.n_agents})"
        )


@dataclass
class BatchSummary:
    """Per-position accuracy with binomial standard errors, plus per-trial fractions correct"""
    n_trials: int
    accuracy: np.ndarray
    standard_errors: np.ndarray
    fraction_correct_last: np.ndarray
    fraction_correct_overall: np.ndarray
    agent_q: np.ndarray
    last_m: int = 8

    def to_dict(self) -> Dict[str, object]:
        return {
            "n_trials": self.n_trials,
            "last_m": self.last_m,
            "positions": [
                {
                    "position": position,
                    "q": float(q),
                    "accuracy": float(acc),
                    "standard_error": float(se),
                }
                for position, (q, acc, se) in enumerate(
                    zip(self.agent_q, self.accuracy, self.standard_errors), start=1
                )
            ],
            "mean_fraction_correct_last": float(np.mean(self.fraction_correct_last)),
            "mean_fraction_correct_overall": float(np.mean(self.fraction_correct_overall)),
        }

    def __str__(self) -> str:
        return (
            f"BatchSummary(trials={self.n_trials}, "
            f"mean_last{self.last_m}={np.mean(self.fraction_correct_last):.4f})"
        )


class SEFlavor(Enum):
    """Heteroskedasticity-consistent covariance flavor"""
    HC0 = "HC0"
    HC1 = "HC1"


@dataclass
class RegressionResult:
    """OLS estimates with heteroskedasticity-robust standard errors"""
    names: List[str]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    n_obs: int
    df_resid: int
    r_squared: float
    adj_r_squared: float
    residual_std_error: float
    f_statistic: float
    se_flavor: SEFlavor = SEFlavor.HC1
    extras: Dict[str, float] = field(default_factory=dict)

    def _index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no regressor named {name!r}; have {self.names}") from None

    def coefficient(self, name: str) -> float:
        return float(self.coefficients[self._index(name)])

    def std_error(self, name: str) -> float:
        return float(self.std_errors[self._index(name)])

    def p_value(self, name: str) -> float:
        return float(self.p_values[self._index(name)])

    def to_dict(self) -> Dict[str, object]:
        def clean(value: float) -> Optional[float]:
            value = float(value)
            return value if math.isfinite(value) else None

        return {
            "coefficients": {
                name: {
                    "estimate": clean(coef),
                    "std_error": clean(se),
                    "t_stat": clean(t),
                    "p_value": clean(p),
                }
                for name, coef, se, t, p in zip(
                    self.names, self.coefficients, self.std_errors, self.t_stats, self.p_values
                )
            },
            "n_obs": self.n_obs,
            "df_resid": self.df_resid,
            "r_squared": clean(self.r_squared),
            "adj_r_squared": clean(self.adj_r_squared),
            "residual_std_error": clean(self.residual_std_error),
            "f_statistic": clean(self.f_statistic),
            "se_flavor": self.se_flavor.value,
            "extras": {key: clean(value) for key, value in sorted(self.extras.items())},
        }

    def __str__(self) -> str:
        terms = ", ".join(
            f"{name}={coef:.4f}({se:.4f})"
            for name, coef, se in zip(self.names, self.coefficients, self.std_errors)
        )
        return f"RegressionResult({terms}, n={self.n_obs}, {self.se_flavor.value})"


@dataclass
class TrialOutcome:
    """Per-trial quantities the regressions are run on"""
    trial_id: int
    q: float
    y_last: float
    y_overall: float
    misleading_early: int
    y_sparse: Optional[float] = None
    y_dense: Optional[float] = None
    q_sparse: Optional[float] = None
    q_dense: Optional[float] = None

    @property
    def is_independent(self) -> bool:
        return self.y_sparse is not None and self.y_dense is not None
