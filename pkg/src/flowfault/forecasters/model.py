"""Forecaster kinds, trained models and series-level forecasting."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..core import IndexedSeries, SeriesPair
from ..errors import ModelKindMismatch, SeriesTooShort, WrongWindowLength
from .tcn import TcnConfig, TcnNetwork, parameter_count

FORMAT_VERSION = 1

# windows per forward pass when forecasting a whole series
_CHUNK = 2048


class Mode(enum.Enum):
    ENDOGENOUS = "endogenous"  # G history -> G
    EXOGENOUS = "exogenous"  # C history -> G


@dataclass(frozen=True)
class Naive:
    pass


@dataclass(frozen=True)
class HardSubtraction:
    lag_m: int

    def __post_init__(self):
        if self.lag_m < 0:
            raise ValueError("lag_m must be >= 0")


@dataclass(frozen=True)
class Tcn:
    config: TcnConfig
    mode: Mode

    @property
    def input_channel(self) -> str:
        return "g" if self.mode is Mode.ENDOGENOUS else "c"


ForecasterKind = Union[Naive, HardSubtraction, Tcn]


def kind_name(kind: ForecasterKind) -> str:
    if isinstance(kind, Naive):
        return "naive"
    if isinstance(kind, HardSubtraction):
        return "hard_subtraction"
    return "tcn_endo" if kind.mode is Mode.ENDOGENOUS else "tcn_exo"


@dataclass(frozen=True)
class Normalization:
    input_mean: float
    input_sd: float
    target_mean: float
    target_sd: float

    def __post_init__(self):
        if not (self.input_sd > 0 and self.target_sd > 0):
            raise ValueError("normalization sd must be > 0")


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: ForecasterKind
    parameters: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)
    normalization: Normalization | None = None
    training_loss_history: tuple[float, ...] = ()
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        params = np.array(self.parameters, dtype=np.float64)
        expected = parameter_count(self.kind.config) if isinstance(self.kind, Tcn) else 0
        if params.shape != (expected,):
            raise ValueError(f"{kind_name(self.kind)} expects {expected} parameters, got {params.size}")
        if isinstance(self.kind, Tcn) and self.normalization is None:
            raise ValueError("a TCN model needs normalization statistics")
        params.setflags(write=False)
        object.__setattr__(self, "parameters", params)
        object.__setattr__(self, "training_loss_history", tuple(map(float, self.training_loss_history)))

    @property
    def name(self) -> str:
        return kind_name(self.kind)

    @classmethod
    def naive(cls) -> TrainedModel:
        return cls(Naive())

    @classmethod
    def hard_subtraction(cls, lag_m: int) -> TrainedModel:
        return cls(HardSubtraction(lag_m))

    def first_target(self, series_start: int = 0) -> int:
        """Earliest index whose forecast is feasible for a series starting at ``series_start``."""
        if isinstance(self.kind, Naive):
            return series_start + 1
        if isinstance(self.kind, HardSubtraction):
            return series_start + max(1, self.kind.lag_m)
        return series_start + self.kind.config.input_window_n + 1


def _network(model: TrainedModel) -> TcnNetwork:
    # the network never writes to its parameters at inference time
    return TcnNetwork(model.kind.config, model.parameters)


def _predict_normalized(net: TcnNetwork, windows: np.ndarray) -> np.ndarray:
    out = np.empty(windows.shape[0])
    for a in range(0, windows.shape[0], _CHUNK):
        out[a : a + _CHUNK], _ = net.forward(windows[a : a + _CHUNK])
    return out


def tcn_forward(model: TrainedModel, input_window) -> float:
    """Forecast ``y(t+1)`` from the ``n+1`` input values ``x(t-n) .. x(t)``."""
    if not isinstance(model.kind, Tcn):
        raise ModelKindMismatch(f"tcn_forward needs a TCN model, got {model.name}")
    window = np.asarray(input_window, dtype=np.float64)
    n = model.kind.config.input_window_n
    if window.shape != (n + 1,):
        raise WrongWindowLength(f"expected a window of {n + 1} values, got shape {window.shape}")
    norm = model.normalization
    x = (window - norm.input_mean) / norm.input_sd
    y, _ = _network(model).forward(x[None, :])
    return float(y[0] * norm.target_sd + norm.target_mean)


def training_windows(pair: SeriesPair, n: int, channel: str) -> tuple[np.ndarray, np.ndarray]:
    """Input windows ``x(t-n..t)`` and targets ``g(t+1)`` for every feasible ``t``."""
    count = len(pair) - n - 1
    if count < 1:
        raise SeriesTooShort(f"series of length {len(pair)} has no complete window of {n + 1} plus a target")
    x = sliding_window_view(pair.channel(channel), n + 1)[:count]
    return x, pair.g[n + 1 :]


def forecast_series(model: TrainedModel, pair: SeriesPair) -> IndexedSeries:
    """One-step-ahead forecasts of ``g`` at every feasible index of ``pair``.

    The result starts at :meth:`TrainedModel.first_target` and runs to the
    end of the series.
    """
    start = model.first_target(pair.start)
    if start >= pair.stop:
        raise SeriesTooShort(f"series of length {len(pair)} too short for {model.name}")
    kind = model.kind
    if isinstance(kind, Naive):
        return IndexedSeries(start, pair.g[:-1])
    if isinstance(kind, HardSubtraction):
        a = start - kind.lag_m - pair.start
        return IndexedSeries(start, pair.c[a : a + pair.stop - start])
    norm = model.normalization
    x, _ = training_windows(pair, kind.config.input_window_n, kind.input_channel)
    y = _predict_normalized(_network(model), (x - norm.input_mean) / norm.input_sd)
    return IndexedSeries(start, y * norm.target_sd + norm.target_mean)
