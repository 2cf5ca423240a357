"""Forecast comparison, detection metrics and report emission.

All reports are plain CSV with deterministic row order so repeated runs can
be diffed byte for byte. Ranges are half-open ``[start, end)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .core import IndexedSeries, SeriesPair, format_float
from .errors import NoCommonRange, NoFaultInMask
from .forecasters import TrainedModel, forecast_series
from .residue import AlarmEvent, ResidueStats, Thresholds, Trigger, residue

COMPARISON_HEADER = "model,mse,range_start,range_end"
DETECTION_HEADER = "fault_start,first_alarm,latency,triggers,false_alarms_prefault"
TRACE_HEADER = "t,actual,forecast,residue,mean_stat,std_stat,mean_thr,std_thr,alarm"


def mse(actual: IndexedSeries, forecast: IndexedSeries) -> float:
    r = residue(actual, forecast).values
    return float(np.mean(r * r))


class ComparisonRow(NamedTuple):
    model_name: str
    mse: float
    test_range: tuple[int, int]


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]

    def by_name(self) -> dict[str, float]:
        return {row.model_name: row.mse for row in self.rows}


def compare_models(pair: SeriesPair, models: Sequence[TrainedModel], test_range: tuple[int, int]) -> ComparisonReport:
    """MSE of each model on the range where every model can forecast."""
    lo, hi = test_range
    lo = max([lo, pair.start] + [m.first_target(pair.start) for m in models])
    hi = min(hi, pair.stop)
    if lo >= hi:
        raise NoCommonRange(f"no index in {test_range} is forecastable by all models")
    actual = pair.target()
    rows = []
    for model in models:
        forecast = forecast_series(model, pair).restrict(lo, hi)
        rows.append(ComparisonRow(model.name, mse(actual, forecast), (lo, hi)))
    return ComparisonReport(tuple(rows))


@dataclass(frozen=True)
class DetectionReport:
    fault_start: int
    first_alarm: int | None
    latency: int | None
    triggers_seen: Trigger | None
    false_alarms_prefault: int

    @property
    def trigger_labels(self) -> list[str]:
        seen = self.triggers_seen
        return [] if seen is None else [t.label for t in (Trigger.MEAN, Trigger.STD) if t in seen]


def detection_report(
    events: Sequence[AlarmEvent], mask: np.ndarray, warmup: int, mask_start: int = 0
) -> DetectionReport:
    """Score alarms against a ground-truth fault mask.

    ``mask[i]`` flags index ``mask_start + i``. False alarms are events in
    ``[warmup, fault_start)``; ``triggers_seen`` unions triggers of events
    inside the faulted range.
    """
    mask = np.asarray(mask, dtype=bool)
    faulted = np.flatnonzero(mask)
    if faulted.size == 0:
        raise NoFaultInMask("ground-truth mask contains no faulted sample")
    fault_start = mask_start + int(faulted[0])
    fault_stop = mask_start + int(faulted[-1]) + 1
    if warmup > fault_start:
        raise ValueError(f"warmup {warmup} is after the fault onset {fault_start}")
    after = [ev.t for ev in events if ev.t >= fault_start]
    first = min(after) if after else None
    seen = None
    for ev in events:
        if fault_start <= ev.t < fault_stop:
            seen = ev.trigger if seen is None else seen | ev.trigger
    false_alarms = sum(1 for ev in events if warmup <= ev.t < fault_start)
    return DetectionReport(
        fault_start=fault_start,
        first_alarm=first,
        latency=None if first is None else first - fault_start,
        triggers_seen=seen,
        false_alarms_prefault=false_alarms,
    )


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def format_comparison(report: ComparisonReport) -> str:
    lines = [COMPARISON_HEADER]
    for row in report.rows:
        lines.append(f"{row.model_name},{format_float(row.mse)},{row.test_range[0]},{row.test_range[1]}")
    return "\n".join(lines) + "\n"


def format_detection(report: DetectionReport) -> str:
    cells = [
        report.fault_start,
        report.first_alarm,
        report.latency,
        "|".join(report.trigger_labels),
        report.false_alarms_prefault,
    ]
    return DETECTION_HEADER + "\n" + ",".join(_cell(c) for c in cells) + "\n"


def format_trace(
    actual: IndexedSeries,
    forecast: IndexedSeries,
    stats: ResidueStats,
    thr: Thresholds,
    events: Sequence[AlarmEvent],
    span: tuple[int, int],
) -> str:
    """Per-sample plot data over ``span``; cells without a value are empty."""
    alarm_at = {ev.t: ev.trigger.label for ev in events}
    lines = [TRACE_HEADER]
    for t in range(*span):
        y = actual.values[t - actual.start] if actual.start <= t < actual.stop else None
        f = forecast.values[t - forecast.start] if forecast.start <= t < forecast.stop else None
        r = None if y is None or f is None else y - f
        if stats.start <= t < stats.stop:
            m, s = stats.mean_stat[t - stats.start], stats.std_stat[t - stats.start]
        else:
            m = s = None
        cells = [t, y, f, r, m, s, thr.mean_thr, thr.std_thr, alarm_at.get(t, "")]
        lines.append(",".join(_cell(c) for c in cells))
    return "\n".join(lines) + "\n"


def emit_report(report: ComparisonReport | DetectionReport, path: str | Path) -> None:
    if isinstance(report, ComparisonReport):
        text = format_comparison(report)
    elif isinstance(report, DetectionReport):
        text = format_detection(report)
    else:
        raise TypeError(f"cannot emit {type(report).__name__}")
    Path(path).write_text(text, encoding="utf-8", newline="\n")

