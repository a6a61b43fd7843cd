"""
SocLearn - Analytics
Least squares with heteroskedasticity-robust standard errors and the density regressions
run on per-trial outcomes
"""

import logging
import math
from collections import defaultdict
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from scipy import linalg, stats

from .exceptions import (
    DimensionMismatchError, EmptyInputError, ParameterError, RankDeficiencyError,
    TopologyMismatchError
)
from .models import RegressionResult, SEFlavor, TrialOutcome
from .records import Records, as_trial_batch

logger = logging.getLogger(__name__)

AUTARKY_BENCHMARK = 0.6915
RANK_TOLERANCE = 1e-10
ROBUSTNESS_M_RANGE = range(4, 13)

# Published experimental estimates, reported alongside simulated results for context only
REFERENCE_VALUES: Dict[str, Dict[str, float]] = {
    "density_regression": {"NetworkDensity": -0.0923, "NetworkDensity_se": 0.0406,
                           "Constant": 0.802, "Constant_se": 0.0218, "p_value": 0.0239,
                           "observations": 260, "adj_r_squared": 0.016},
    "misleading_interaction_regression": {"interaction": -0.050, "interaction_se": 0.030,
                                          "interaction_p_value": 0.0923,
                                          "MisleadingEarlySignals": 0.014, "NetworkDensity": 0.033,
                                          "Constant": 0.768, "observations": 260},
    "independent_experiment_regression": {"NetworkDensity": 0.0865, "NetworkDensity_se": 0.0417,
                                          "Constant": 0.660, "p_value": 0.0391, "observations": 260},
    "gain_from_social_learning": {"0.25": 0.0873, "0.75": 0.0412},
    "against_signal_last8": {"count_0.25": 138, "count_0.75": 136,
                             "accuracy_0.25": 0.8188, "accuracy_0.75": 0.7132},
    "overall_accuracy_sd": {"0.25": 0.0912, "0.75": 0.1136},
    "mean_window_uncertainty": {"0.25": 0.178, "0.75": 0.165},
    "independent_arm_accuracy": {"0.25": 0.682, "0.75": 0.725},
    "overall_accuracy_regression": {"p_value": 0.663},
}


def _as_design(y: Sequence[float], X: Sequence[Sequence[float]]):
    y = np.asarray(y, dtype=float)
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if y.ndim != 1 or X.ndim != 2:
        raise DimensionMismatchError(f"need a vector y and a matrix X, got shapes {y.shape} and {X.shape}")
    if X.shape[0] != y.shape[0]:
        raise DimensionMismatchError(f"y has {y.shape[0]} rows but X has {X.shape[0]}")
    if X.shape[0] <= X.shape[1]:
        raise DimensionMismatchError(
            f"need more observations than regressors, got {X.shape[0]} rows and {X.shape[1]} columns"
        )
    return y, X


def ols_robust(y: Sequence[float], X: Sequence[Sequence[float]], names: Optional[List[str]] = None,
               se_flavor: SEFlavor = SEFlavor.HC1) -> RegressionResult:
    """
    Least squares through a QR decomposition with sandwich standard errors

    The first column of X is taken to be the intercept for R-squared and the F
    statistic. HC1 scales the HC0 covariance by n / (n - k); p-values use the t
    distribution with n - k degrees of freedom.
    """
    y, X = _as_design(y, X)
    n, k = X.shape
    names = list(names) if names is not None else [f"x{j}" for j in range(k)]
    if len(names) != k:
        raise DimensionMismatchError(f"{len(names)} names for {k} regressors")

    Q, R = np.linalg.qr(X)
    diagonal = np.abs(np.diag(R))
    if diagonal.max() == 0 or np.any(diagonal <= RANK_TOLERANCE * diagonal.max()):
        raise RankDeficiencyError(f"design matrix is rank deficient (|diag R| = {diagonal})")

    coefficients = linalg.solve_triangular(R, Q.T @ y)
    residuals = y - X @ coefficients
    R_inverse = linalg.solve_triangular(R, np.eye(k))
    bread = R_inverse @ R_inverse.T
    meat = (X * residuals[:, None] ** 2).T @ X
    covariance = bread @ meat @ bread
    if se_flavor is SEFlavor.HC1:
        covariance *= n / (n - k)

    df_resid = n - k
    std_errors = np.sqrt(np.clip(np.diag(covariance), 0.0, None))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = coefficients / std_errors
    p_values = 2.0 * stats.t.sf(np.abs(t_stats), df_resid)

    ssr = float(residuals @ residuals)
    centered = y - y.mean()
    sst = float(centered @ centered)
    r_squared = 1.0 - ssr / sst if sst > 0 else float("nan")
    adj_r_squared = 1.0 - (1.0 - r_squared) * (n - 1) / df_resid
    if k > 1 and ssr > 0:
        f_statistic = (r_squared / (k - 1)) / ((1.0 - r_squared) / df_resid)
    else:
        f_statistic = float("nan")

    return RegressionResult(
        names=names, coefficients=coefficients, std_errors=std_errors, t_stats=t_stats,
        p_values=p_values, n_obs=n, df_resid=df_resid, r_squared=r_squared,
        adj_r_squared=adj_r_squared, residual_std_error=math.sqrt(ssr / df_resid),
        f_statistic=f_statistic, se_flavor=se_flavor,
    )


def trial_outcomes(records: Records, last_m: int = 8) -> List[TrialOutcome]:
    """Reduce sequential trial records to one outcome per trial"""
    batch = as_trial_batch(records)
    if not batch.is_sequential:
        raise TopologyMismatchError("trial outcomes need sequential trials; use independent_outcomes")
    if not 1 <= last_m <= batch.n_agents:
        raise ParameterError(f"last_m must be in 1..{batch.n_agents}, got {last_m}")
    correct = batch.correct
    early = math.ceil(batch.n_agents / 5)
    state_sign = np.where(batch.states == 1, 1.0, -1.0)[:, None]
    misleading = (batch.signals[:, :early] * state_sign < 0).sum(axis=1)
    return [
        TrialOutcome(
            trial_id=int(batch.trial_ids[row]),
            q=float(batch.trial_q[row]),
            y_last=float(correct[row, -last_m:].mean()),
            y_overall=float(correct[row].mean()),
            misleading_early=int(misleading[row]),
        )
        for row in range(len(batch))
    ]


def independent_outcomes(records: Records) -> List[TrialOutcome]:
    """
    Reduce independent-neighbors trials to one outcome per trial with both arms

    Agents with link probability 0 are the initial agents; the two positive link
    probabilities identify the sparse and dense evaluator arms.
    """
    batch = as_trial_batch(records)
    correct = batch.correct
    outcomes = []
    for row in range(len(batch)):
        arms = sorted(float(q) for q in np.unique(batch.q[row]) if q > 0)
        if len(arms) != 2:
            raise TopologyMismatchError(
                f"trial {batch.trial_ids[row]} has evaluator link probabilities {arms}, expected two"
            )
        sparse, dense = arms
        evaluators = batch.q[row] > 0
        outcomes.append(TrialOutcome(
            trial_id=int(batch.trial_ids[row]),
            q=float("nan"),
            y_last=float(correct[row, evaluators].mean()),
            y_overall=float(correct[row].mean()),
            misleading_early=0,
            y_sparse=float(correct[row, batch.q[row] == sparse].mean()),
            y_dense=float(correct[row, batch.q[row] == dense].mean()),
            q_sparse=sparse,
            q_dense=dense,
        ))
    return outcomes


def _require(outcomes: Iterable[TrialOutcome]) -> List[TrialOutcome]:
    outcomes = list(outcomes)
    if not outcomes:
        raise EmptyInputError("no trial outcomes")
    return outcomes


def density_regression(outcomes: Iterable[TrialOutcome],
                       se_flavor: SEFlavor = SEFlavor.HC1) -> RegressionResult:
    """Last-m fraction correct on network density"""
    outcomes = _require(outcomes)
    q = np.array([o.q for o in outcomes])
    y = np.array([o.y_last for o in outcomes])
    return ols_robust(y, np.column_stack([np.ones_like(q), q]), ["Constant", "NetworkDensity"], se_flavor)


def overall_accuracy_regression(outcomes: Iterable[TrialOutcome],
                                se_flavor: SEFlavor = SEFlavor.HC1) -> RegressionResult:
    """Overall fraction correct on network density"""
    outcomes = _require(outcomes)
    q = np.array([o.q for o in outcomes])
    y = np.array([o.y_overall for o in outcomes])
    return ols_robust(y, np.column_stack([np.ones_like(q), q]), ["Constant", "NetworkDensity"], se_flavor)


def misleading_interaction_regression(outcomes: Iterable[TrialOutcome],
                                      se_flavor: SEFlavor = SEFlavor.HC1) -> RegressionResult:
    """
    Last-m fraction correct on density, misleading early signals and their interaction

    extras['marginal_effect_difference'] is the interaction coefficient times the spread
    of densities, the extra effect of one misleading signal on the densest network.
    """
    outcomes = _require(outcomes)
    q = np.array([o.q for o in outcomes])
    m = np.array([o.misleading_early for o in outcomes], dtype=float)
    y = np.array([o.y_last for o in outcomes])
    X = np.column_stack([np.ones_like(q), q, m, q * m])
    result = ols_robust(y, X, ["Constant", "NetworkDensity", "MisleadingEarlySignals",
                               "MisleadingEarlySignals x NetworkDensity"], se_flavor)
    gamma = result.coefficient("MisleadingEarlySignals x NetworkDensity")
    result.extras["marginal_effect_difference"] = gamma * float(q.max() - q.min())
    return result


def independent_experiment_regression(outcomes: Iterable[TrialOutcome],
                                      se_flavor: SEFlavor = SEFlavor.HC1) -> RegressionResult:
    """Evaluator-arm fraction correct on arm density, two rows per trial"""
    outcomes = _require(outcomes)
    if not all(o.is_independent for o in outcomes):
        raise TopologyMismatchError("every outcome needs sparse and dense arm accuracies")
    q = np.array([value for o in outcomes for value in (o.q_sparse, o.q_dense)], dtype=float)
    y = np.array([value for o in outcomes for value in (o.y_sparse, o.y_dense)], dtype=float)
    return ols_robust(y, np.column_stack([np.ones_like(q), q]), ["Constant", "NetworkDensity"], se_flavor)


def gain_from_social_learning(outcomes: Iterable[TrialOutcome],
                              benchmark: float = AUTARKY_BENCHMARK) -> Dict[float, float]:
    """Per density, mean of (last-m fraction correct - autarky benchmark)"""
    outcomes = _require(outcomes)
    gains: Dict[float, List[float]] = defaultdict(list)
    for outcome in outcomes:
        gains[outcome.q].append(outcome.y_last - benchmark)
    return {q: float(np.mean(values)) for q, values in sorted(gains.items())}


def robustness_sweep(records: Records, m_values: Iterable[int] = ROBUSTNESS_M_RANGE,
                     se_flavor: SEFlavor = SEFlavor.HC1) -> Dict[int, RegressionResult]:
    """Density regression with the dependent variable taken over the last m agents"""
    m_values = list(m_values)
    bad = [m for m in m_values if m not in ROBUSTNESS_M_RANGE]
    if bad:
        raise ParameterError(f"m must be between 4 and 12, got {bad}")
    batch = as_trial_batch(records)
    if batch.n_agents != 40:
        raise TopologyMismatchError(f"robustness sweep is defined for 40-agent trials, got {batch.n_agents}")
    return {m: density_regression(trial_outcomes(batch, last_m=m), se_flavor) for m in m_values}


def _stars(p_value: float) -> str:
    if not p_value < 0.1:
        return ""
    if p_value < 0.01:
        return "***"
    if p_value < 0.05:
        return "**"
    return "*"


def format_regression_table(result: RegressionResult, title: str = "",
                            dependent: str = "FractionCorrect") -> str:
    """Text table: regressors then the constant, robust SEs in parentheses"""
    width = max(len(name) for name in result.names + ["Observations", "Adjusted R^2"]) + 2
    order = [name for name in result.names if name != "Constant"]
    if "Constant" in result.names:
        order.append("Constant")

    rule = "=" * (width + 16)
    lines = [title] if title else []
    lines += [rule, f"{'':<{width}}{dependent:>16}", "-" * (width + 16)]
    for name in order:
        estimate = f"{result.coefficient(name):.4f}{_stars(result.p_value(name))}"
        lines.append(f"{name:<{width}}{estimate:>16}")
        lines.append(f"{'':<{width}}{'(' + format(result.std_error(name), '.4f') + ')':>16}")
    lines.append("-" * (width + 16))
    lines.append(f"{'Observations':<{width}}{result.n_obs:>16d}")
    lines.append(f"{'Adjusted R^2':<{width}}{result.adj_r_squared:>16.3f}")
    lines.append(rule)
    lines.append(f"{result.se_flavor.value} robust standard errors; * p<0.1, ** p<0.05, *** p<0.01")
    return "\n".join(lines)
