"""Composition of the modules into the forecast -> residue -> alarm workflow.

These functions hold no algorithms of their own; the CLI subcommands and the
``e2e`` run both call them so every output can be reproduced from Python.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from .config import RunConfig
from .core import IndexedSeries, SeriesPair, emit_csv, load_csv, split
from .evaluation import (
    ComparisonReport,
    DetectionReport,
    compare_models,
    detection_report,
    emit_report,
    format_trace,
)
from .faults import inject
from .forecasters import Mode, TrainedModel, estimate_lag, forecast_series, save_model, tcn_train
from .residue import (
    AlarmEvent,
    ResidueStats,
    Thresholds,
    calibrate,
    detect,
    emit_alarms,
    residue,
    rolling_stats,
)
from .simulator import generate

log = logging.getLogger(__name__)


def load_series(cfg: RunConfig) -> SeriesPair:
    path = cfg["data.path"]
    return load_csv(path) if path else generate(cfg.sim_config())


def hard_subtraction_lag(train: SeriesPair, cfg: RunConfig) -> int:
    lag = cfg["hardsub.lag_m"]
    if lag is None:
        lag = estimate_lag(train, cfg["hardsub.max_lag"])
        log.info("estimated Hard Subtraction lag: %d", lag)
    return lag


def train_model(name: str, train: SeriesPair, cfg: RunConfig) -> TrainedModel:
    if name == "naive":
        return TrainedModel.naive()
    if name == "hard_subtraction":
        return TrainedModel.hard_subtraction(hard_subtraction_lag(train, cfg))
    mode = Mode.ENDOGENOUS if name == "tcn_endo" else Mode.EXOGENOUS
    log.info("training %s on [%d, %d)", name, train.start, train.stop)
    return tcn_train(train, cfg.tcn_kind(mode))


def residue_over(model: TrainedModel, series: SeriesPair, span: tuple[int, int]) -> IndexedSeries:
    return residue(series.target(), forecast_series(model, series)).restrict(*span)


def calibrate_thresholds(
    model: TrainedModel, series: SeriesPair, cfg: RunConfig, safety_factor: float | None = None
) -> tuple[Thresholds, ResidueStats]:
    """Thresholds from the residue statistics over the calibration range."""
    stats = rolling_stats(residue_over(model, series, cfg["split.calibrate"]), cfg["alarm.window_w"])
    sf = cfg["alarm.safety_factor"] if safety_factor is None else safety_factor
    return calibrate(stats, sf), stats


def detect_over(
    model: TrainedModel, series: SeriesPair, thr: Thresholds, span: tuple[int, int]
) -> tuple[ResidueStats, list[AlarmEvent]]:
    stats = rolling_stats(residue_over(model, series, span), thr.window_w)
    return stats, detect(stats, thr)


@dataclass
class E2EResult:
    series: SeriesPair
    monitored: SeriesPair  # faulted copy when a fault is configured
    models: dict[str, TrainedModel]
    comparison: ComparisonReport
    thresholds: Thresholds
    stats: ResidueStats
    events: list[AlarmEvent]
    detection: DetectionReport | None


def run_e2e(cfg: RunConfig, out_dir: str | Path) -> E2EResult:
    """simulate/load -> split -> train -> compare -> calibrate -> (inject) -> detect."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    series = load_series(cfg)
    emit_csv(series, out / "data.csv")
    train, _, _ = split(series, cfg.split_spec())

    models = {}
    for name in ("naive", "hard_subtraction", "tcn_endo", "tcn_exo"):
        models[name] = train_model(name, train, cfg)
        save_model(models[name], out / f"model_{name}.json")
    test_range = cfg["split.test"]
    comparison = compare_models(series, list(models.values()), test_range)
    emit_report(comparison, out / "comparison.csv")

    monitor = models[cfg["alarm.model"]]
    thr, _ = calibrate_thresholds(monitor, series, cfg)
    thr.save(out / "thresholds.json")

    spec = cfg.fault_spec()
    monitored, mask = series, None
    if spec is not None:
        monitored, mask = inject(series, spec)
        emit_csv(monitored, out / "faulted.csv")

    stats, events = detect_over(monitor, monitored, thr, test_range)
    emit_alarms(events, thr, out / "alarms.csv")
    detection = None
    if mask is not None:
        warmup = min(stats.start, spec.start)
        detection = detection_report(events, mask, warmup=warmup, mask_start=series.start)
        emit_report(detection, out / "detection.csv")

    forecast = forecast_series(monitor, monitored)
    trace = format_trace(monitored.target(), forecast, stats, thr, events, test_range)
    (out / "trace.csv").write_text(trace, encoding="utf-8", newline="\n")
    return E2EResult(series, monitored, models, comparison, thr, stats, events, detection)
