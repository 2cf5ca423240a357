"""One-step-ahead forecasters: Naive, Hard Subtraction and TCN."""

from .baselines import estimate_lag, hard_subtraction_forecast, lagged_correlation, naive_forecast
from .model import (
    FORMAT_VERSION,
    ForecasterKind,
    HardSubtraction,
    Mode,
    Naive,
    Normalization,
    Tcn,
    TrainedModel,
    forecast_series,
    kind_name,
    tcn_forward,
)
from .serialize import load_model, model_from_json, model_to_json, save_model
from .tcn import TcnConfig, TcnNetwork, parameter_count, parameter_layout
from .training import tcn_train

__all__ = [
    "FORMAT_VERSION",
    "ForecasterKind",
    "HardSubtraction",
    "Mode",
    "Naive",
    "Normalization",
    "Tcn",
    "TcnConfig",
    "TcnNetwork",
    "TrainedModel",
    "estimate_lag",
    "forecast_series",
    "hard_subtraction_forecast",
    "kind_name",
    "lagged_correlation",
    "load_model",
    "model_from_json",
    "model_to_json",
    "naive_forecast",
    "parameter_count",
    "parameter_layout",
    "save_model",
    "tcn_forward",
    "tcn_train",
]
