"""
SocLearn - Exceptions
Error hierarchy shared by the solver, simulator, analytics and CLI
"""

from typing import Optional, Tuple


class SoclearnError(Exception):
    """Base class for every error raised by this package"""


class ParameterError(SoclearnError, ValueError):
    """A model or run parameter is outside its valid range"""


class ConfigurationError(SoclearnError):
    """A configuration file or run configuration cannot be used"""


class EmptyInputError(SoclearnError, ValueError):
    """An operation that needs at least one record received none"""


class TopologyMismatchError(SoclearnError):
    """Records come from a network topology the operation does not support"""


class CalibrationError(SoclearnError):
    """No formula variant pair reproduces the published accuracy table"""

    def __init__(self, message: str, best_pair: Optional[Tuple[str, str]] = None,
                 best_deviation: Optional[float] = None):
        super().__init__(message)
        self.best_pair = best_pair
        self.best_deviation = best_deviation


class ReproductionError(SoclearnError):
    """A computed table misses its published counterpart by more than the tolerance"""

    def __init__(self, message: str, best_rule: Optional[str] = None,
                 best_deviation: Optional[float] = None):
        super().__init__(message)
        self.best_rule = best_rule
        self.best_deviation = best_deviation


class RegressionError(SoclearnError):
    """Base class for least-squares failures"""


class DimensionMismatchError(RegressionError, ValueError):
    """Response and design matrix have incompatible shapes"""


class RankDeficiencyError(RegressionError):
    """Design matrix does not have full column rank"""
