"""
SocLearn - Naive and Rational Social Learning on Random Observation Networks
"""

__version__ = "1.0.0"

from .analytics import (
    density_regression, independent_experiment_regression, misleading_interaction_regression,
    ols_robust, trial_outcomes
)
from .config_loader import ConfigLoader
from .exceptions import (
    CalibrationError, ConfigurationError, ParameterError, RegressionError, SoclearnError
)
from .models import (
    AccuracyCurve, BehaviorKind, BehaviorModel, BoundCurve, ChoiceProbVariant, EllVariant,
    IndependentTopology, NetworkParams, RegressionResult, SEFlavor, SequentialTopology,
    SignalParams, State, TrialConfig, TrialRecord
)
from .naive_exact import VariantCalibrator, calibrate_variants, naive_accuracy_curve
from .rational_bound import constrained_accuracy_curve
from .records import TrialBatch, read_records, write_records
from .simulator import TrialSimulator, run_batch, run_trial

__all__ = [
    "AccuracyCurve",
    "BehaviorKind",
    "BehaviorModel",
    "BoundCurve",
    "CalibrationError",
    "ChoiceProbVariant",
    "ConfigLoader",
    "ConfigurationError",
    "EllVariant",
    "IndependentTopology",
    "NetworkParams",
    "ParameterError",
    "RegressionError",
    "RegressionResult",
    "SEFlavor",
    "SequentialTopology",
    "SignalParams",
    "SoclearnError",
    "State",
    "TrialBatch",
    "TrialConfig",
    "TrialRecord",
    "TrialSimulator",
    "VariantCalibrator",
    "calibrate_variants",
    "constrained_accuracy_curve",
    "density_regression",
    "independent_experiment_regression",
    "misleading_interaction_regression",
    "naive_accuracy_curve",
    "ols_robust",
    "read_records",
    "run_batch",
    "run_trial",
    "trial_outcomes",
    "write_records",
]
