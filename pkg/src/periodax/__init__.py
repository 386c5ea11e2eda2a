"""Semi-parametric period estimation in Gaussian white noise."""
from .criterion import criterion_L, decompose, gamma_curvature_check, gamma_oracle, phi_hat
from .estimator import EstimatorConfig, estimate_period, one_step_oracle
from .observation import SimulationConfig, exponential_sums, simulate_observation
from .risk_lab import ExperimentConfig, compare_estimators, run_mc_risk, second_order_curve
from .signal import PeriodicSignal, deriv_norm_sq, eval_signal, sobolev_norm
from .weights import (
    WeightSequence,
    fisher_information,
    pinsker_solution,
    projection_weights,
    risk_functional,
    solve_WT,
    weighted_fisher,
)

__all__ = [
    "PeriodicSignal",
    "eval_signal",
    "deriv_norm_sq",
    "sobolev_norm",
    "SimulationConfig",
    "simulate_observation",
    "exponential_sums",
    "WeightSequence",
    "projection_weights",
    "solve_WT",
    "pinsker_solution",
    "risk_functional",
    "fisher_information",
    "weighted_fisher",
    "phi_hat",
    "criterion_L",
    "gamma_oracle",
    "gamma_curvature_check",
    "decompose",
    "EstimatorConfig",
    "estimate_period",
    "one_step_oracle",
    "ExperimentConfig",
    "run_mc_risk",
    "compare_estimators",
    "second_order_curve",
]
