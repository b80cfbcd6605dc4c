"""Robust forward performance of CRRA type under mean and volatility ambiguity."""

from .model import (
    CrraPreference,
    DomainError,
    MarketParams,
    MeanReturnInterval,
    NoAmbiguity,
    Premiums,
    Rectangle,
    Structured,
    VolatilityInterval,
    crra_utility,
    log_drift_rate,
    premiums,
    risk_tolerance,
)
from .simulate import SimConfig, analytic_performance_exponent, martingale_test, simulate_paths
from .strategy import (
    Direction,
    calibrate,
    classify_direction,
    drift_coefficient_f,
    general_feedback_strategy,
    optimal_fraction,
)
from .worst_case import (
    Branch,
    Mode,
    WorstCase,
    constraint_residual,
    grid_minimax_oracle,
    select_worst_case,
    structured_coefficients,
    worst_case_mean_return,
    worst_case_rectangle,
    worst_case_structured,
    worst_case_volatility,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "CrraPreference",
    "Direction",
    "DomainError",
    "MarketParams",
    "MeanReturnInterval",
    "Mode",
    "NoAmbiguity",
    "Premiums",
    "Rectangle",
    "SimConfig",
    "Structured",
    "VolatilityInterval",
    "WorstCase",
    "analytic_performance_exponent",
    "calibrate",
    "classify_direction",
    "constraint_residual",
    "crra_utility",
    "drift_coefficient_f",
    "general_feedback_strategy",
    "grid_minimax_oracle",
    "log_drift_rate",
    "martingale_test",
    "optimal_fraction",
    "premiums",
    "risk_tolerance",
    "select_worst_case",
    "simulate_paths",
    "structured_coefficients",
    "worst_case_mean_return",
    "worst_case_rectangle",
    "worst_case_structured",
    "worst_case_volatility",
]
