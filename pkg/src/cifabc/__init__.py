"""Two-sample tests for cumulative incidence functions under competing risks.

The central procedure compares the cause-1 cumulative incidence of two groups
by the area between their Aalen-Johansen curves and calibrates it with a wild
bootstrap.
"""

from .bootstrap import (
    MultiplierSpec,
    SingularFactorError,
    TestResult,
    bootstrap_replicates,
    draw_multipliers,
    run_test,
    wb_adjusted_process,
    wb_process,
    wb_statistic,
)
from .core import (
    DataError,
    Observation,
    StepFunction,
    TwoSampleData,
    at_risk,
    counting_process,
    validate,
)
from .estimators import EstimatorOutput, aalen_johansen, kaplan_meier, nelson_aalen
from .kernels import BACKEND
from .statistics import (
    StatisticValue,
    Window,
    abc_statistic,
    cvm_statistic,
    ks_statistic,
    pepe_statistic,
    zabc_statistic,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "DataError",
    "EstimatorOutput",
    "MultiplierSpec",
    "Observation",
    "SingularFactorError",
    "StatisticValue",
    "StepFunction",
    "TestResult",
    "TwoSampleData",
    "Window",
    "aalen_johansen",
    "abc_statistic",
    "at_risk",
    "bootstrap_replicates",
    "counting_process",
    "cvm_statistic",
    "draw_multipliers",
    "kaplan_meier",
    "ks_statistic",
    "nelson_aalen",
    "pepe_statistic",
    "run_test",
    "validate",
    "wb_adjusted_process",
    "wb_process",
    "wb_statistic",
    "zabc_statistic",
]
