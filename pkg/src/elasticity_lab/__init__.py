"""Synthetic electricity-market laboratory for instrumental-variable estimates
of the short-run price elasticity of demand."""

__version__ = "0.1.0"

from .bias import BiasPrediction, thams_bias_ar1, thams_bias_general
from .estimators import (
    EstimationResult,
    RegressionFit,
    StrategySpec,
    estimate,
    hac_covariance,
    ols,
    tsls,
)
from .harness import ExperimentResult, ScenarioConfig, replicate, run_experiment, run_scenario
from .market import (
    EquilibriumPanel,
    MarketParams,
    calibrate_intercept,
    demand_response,
    equilibrium_price,
    simulate_market,
)
from .series import (
    ArModel,
    TimeSeries,
    acf,
    difference,
    fit_ar,
    lag_matrix,
    pacf,
    shuffle,
    simulate_ar,
)
from .wind import SurrogateCalibration, WindSpec, load_wind, surrogate_wind, synthetic_ar1_wind

__all__ = [
    "ArModel",
    "BiasPrediction",
    "EquilibriumPanel",
    "EstimationResult",
    "ExperimentResult",
    "MarketParams",
    "RegressionFit",
    "ScenarioConfig",
    "StrategySpec",
    "SurrogateCalibration",
    "TimeSeries",
    "WindSpec",
    "acf",
    "calibrate_intercept",
    "demand_response",
    "difference",
    "equilibrium_price",
    "estimate",
    "fit_ar",
    "hac_covariance",
    "lag_matrix",
    "load_wind",
    "ols",
    "pacf",
    "replicate",
    "run_experiment",
    "run_scenario",
    "shuffle",
    "simulate_ar",
    "simulate_market",
    "surrogate_wind",
    "synthetic_ar1_wind",
    "thams_bias_ar1",
    "thams_bias_general",
    "tsls",
]
