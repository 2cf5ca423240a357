"""Residue analysis and fault alarms.

The residue ``r(t) = y(t) - y_hat(t)`` is summarized over a trailing window
of ``w`` samples by two statistics:

* ``mean_stat``: absolute value of the rolling mean of ``r`` (|mean(r)|, not
  mean(|r|), so zero-mean noise of any variance keeps it near zero);
* ``std_stat``: rolling population standard deviation of ``r`` (divisor w).

Thresholds are the maxima of the statistics over a fault-free calibration
interval, optionally scaled by a safety factor. An alarm fires wherever a
statistic is strictly above its threshold.
"""

from __future__ import annotations

import enum
import json
import math
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .core import IndexedSeries, format_float, overlap
from .errors import (
    CorruptFile,
    EmptyStats,
    NoOverlap,
    UnsortedEvents,
    VersionMismatch,
    WindowTooLarge,
    WindowTooSmall,
)

THRESHOLDS_VERSION = 1
THRESHOLDS_TAG = "flowfault-thresholds"
ALARMS_HEADER = "t,trigger,mean_value,std_value,mean_thr,std_thr"


class ResidueSeries(IndexedSeries):
    @property
    def residues(self) -> np.ndarray:
        return self.values


def residue(actual: IndexedSeries, forecast: IndexedSeries) -> ResidueSeries:
    """``actual - forecast`` over the overlapping index range."""
    lo, hi = overlap(actual, forecast)
    if lo >= hi:
        raise NoOverlap(
            f"actual [{actual.start}, {actual.stop}) and forecast [{forecast.start}, {forecast.stop}) do not overlap"
        )
    a = actual.values[lo - actual.start : hi - actual.start]
    f = forecast.values[lo - forecast.start : hi - forecast.start]
    return ResidueSeries(lo, a - f)


@dataclass(frozen=True, eq=False)
class ResidueStats:
    """Rolling statistics; entry ``i`` covers residues ``start+i-w+1 .. start+i``."""

    start: int
    window_w: int
    mean_stat: np.ndarray = field(repr=False)
    std_stat: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("mean_stat", "std_stat"):
            a = np.array(getattr(self, name), dtype=np.float64)
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.mean_stat.shape != self.std_stat.shape:
            raise ValueError("mean_stat and std_stat must have equal length")

    def __len__(self) -> int:
        return int(self.mean_stat.size)

    @property
    def stop(self) -> int:
        return self.start + len(self)

    def restrict(self, start: int, stop: int) -> ResidueStats:
        a = max(start, self.start)
        b = max(a, min(stop, self.stop))
        i, j = a - self.start, b - self.start
        return ResidueStats(a, self.window_w, self.mean_stat[i:j], self.std_stat[i:j])


# Below this sd/|mean| ratio the rounding of the mean itself dominates the
# centred sum of squares, so such windows take the pairwise formula.
_NEAR_CONSTANT = 1e-8


def _pairwise_var(values: np.ndarray) -> float:
    """Population variance as sum_{i<j} (x_i - x_j)^2 / w^2: no cancellation, exact 0 for constants."""
    v = np.asarray(values, dtype=np.float64)
    d = v[:, None] - v[None, :]
    return math.fsum((d * d).ravel().tolist()) / (2 * v.size * v.size)


def rolling_stats(res: IndexedSeries, window_w: int) -> ResidueStats:
    """Trailing-window |mean| and population sd at every full window.

    Each window mean is a correctly rounded ``math.fsum`` divided by ``w``, so
    ``mean_stat`` keeps full relative precision even when positive and
    negative residues nearly cancel; the sd is a centred two-pass sum, with a
    pairwise fallback for nearly constant windows. Neither degrades with
    series length the way running-sum updates do.
    """
    if window_w < 2:
        raise WindowTooSmall(f"window_w must be >= 2, got {window_w}")
    r = np.asarray(res.values, dtype=np.float64)
    if r.size < window_w:
        raise WindowTooLarge(f"window_w={window_w} exceeds residue length {r.size}")
    win = sliding_window_view(r, window_w)
    mean = np.fromiter((math.fsum(row) for row in win.tolist()), dtype=np.float64, count=win.shape[0])
    mean /= window_w
    dev = win - mean[:, None]
    var = np.einsum("ij,ij->i", dev, dev) / window_w
    for i in np.flatnonzero(var <= (_NEAR_CONSTANT * mean) ** 2):
        var[i] = _pairwise_var(win[i])
    return ResidueStats(res.start + window_w - 1, window_w, np.abs(mean), np.sqrt(var))


def _window_stats(values: Sequence[float]) -> tuple[float, float]:
    w = len(values)
    m = math.fsum(values) / w
    var = math.fsum((v - m) ** 2 for v in values) / w
    if var <= (_NEAR_CONSTANT * m) ** 2:
        var = _pairwise_var(np.fromiter(values, dtype=np.float64, count=w))
    return abs(m), math.sqrt(var)


@dataclass(frozen=True)
class Thresholds:
    mean_thr: float
    std_thr: float
    window_w: int
    safety_factor: float = 1.0
    calibration_range: tuple[int, int] = (0, 0)
    format_version: int = THRESHOLDS_VERSION

    def to_json(self) -> str:
        doc = {
            "format": THRESHOLDS_TAG,
            "format_version": self.format_version,
            "mean_thr": self.mean_thr,
            "std_thr": self.std_thr,
            "window_w": self.window_w,
            "safety_factor": self.safety_factor,
            "calibration_range": list(self.calibration_range),
        }
        return json.dumps(doc, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> Thresholds:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CorruptFile(f"thresholds file is not valid JSON: {exc}") from None
        if not isinstance(doc, dict) or doc.get("format") != THRESHOLDS_TAG:
            raise CorruptFile("not a flowfault thresholds file")
        if doc.get("format_version") != THRESHOLDS_VERSION:
            raise VersionMismatch(f"thresholds format_version {doc.get('format_version')!r} is not supported")
        try:
            a, b = doc["calibration_range"]
            return cls(
                float(doc["mean_thr"]),
                float(doc["std_thr"]),
                int(doc["window_w"]),
                float(doc["safety_factor"]),
                (int(a), int(b)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptFile(f"malformed thresholds file: {exc}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8", newline="\n")

    @classmethod
    def load(cls, path: str | Path) -> Thresholds:
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def calibrate(stats: ResidueStats, safety_factor: float = 1.0) -> Thresholds:
    """Thresholds at ``safety_factor`` times the maximum of each statistic."""
    if not safety_factor >= 1:
        raise ValueError(f"safety_factor must be >= 1, got {safety_factor}")
    if len(stats) == 0:
        raise EmptyStats("cannot calibrate on empty statistics")
    return Thresholds(
        mean_thr=safety_factor * float(stats.mean_stat.max()),
        std_thr=safety_factor * float(stats.std_stat.max()),
        window_w=stats.window_w,
        safety_factor=float(safety_factor),
        calibration_range=(stats.start - stats.window_w + 1, stats.stop),
    )


class Trigger(enum.Flag):
    MEAN = enum.auto()
    STD = enum.auto()
    BOTH = MEAN | STD

    @property
    def label(self) -> str:
        return {Trigger.MEAN: "mean", Trigger.STD: "std", Trigger.BOTH: "both"}[self]

    @classmethod
    def from_label(cls, label: str) -> Trigger:
        return {"mean": cls.MEAN, "std": cls.STD, "both": cls.BOTH}[label]


class AlarmEvent(NamedTuple):
    t: int
    trigger: Trigger
    mean_value: float
    std_value: float


def detect(stats: ResidueStats, thr: Thresholds) -> list[AlarmEvent]:
    above_mean = stats.mean_stat > thr.mean_thr
    above_std = stats.std_stat > thr.std_thr
    events = []
    for i in np.flatnonzero(above_mean | above_std):
        if above_mean[i] and above_std[i]:
            trigger = Trigger.BOTH
        elif above_mean[i]:
            trigger = Trigger.MEAN
        else:
            trigger = Trigger.STD
        events.append(AlarmEvent(stats.start + int(i), trigger, float(stats.mean_stat[i]), float(stats.std_stat[i])))
    return events


class Episode(NamedTuple):
    start: int
    end: int
    triggers: Trigger


def merge_episodes(events: Iterable[AlarmEvent], gap: int) -> list[Episode]:
    """Group events whose indices differ by at most ``gap`` into episodes."""
    episodes: list[Episode] = []
    prev = None
    for ev in events:
        if prev is not None and ev.t < prev:
            raise UnsortedEvents(f"event at t={ev.t} follows t={prev}")
        if episodes and ev.t - episodes[-1].end <= gap:
            last = episodes[-1]
            episodes[-1] = Episode(last.start, ev.t, last.triggers | ev.trigger)
        else:
            episodes.append(Episode(ev.t, ev.t, ev.trigger))
        prev = ev.t
    return episodes


class RollingMonitor:
    """Incremental detector fed one residue at a time.

    Statistics agree with :func:`rolling_stats` up to rounding (each window
    is reduced with exact ``math.fsum`` sums), so alarms match :func:`detect`
    except for values within an ulp of a threshold. Not thread-safe: one
    writer per instance.
    """

    def __init__(self, thresholds: Thresholds):
        self.thresholds = thresholds
        self._window: deque[float] = deque(maxlen=thresholds.window_w)

    def push(self, t: int, r: float) -> AlarmEvent | None:
        self._window.append(float(r))
        if len(self._window) < self.thresholds.window_w:
            return None
        m, s = _window_stats(self._window)
        above_mean = m > self.thresholds.mean_thr
        above_std = s > self.thresholds.std_thr
        if not (above_mean or above_std):
            return None
        trigger = Trigger.BOTH if above_mean and above_std else Trigger.MEAN if above_mean else Trigger.STD
        return AlarmEvent(t, trigger, m, s)


def format_alarms(events: Sequence[AlarmEvent], thr: Thresholds) -> str:
    lines = [ALARMS_HEADER]
    for ev in events:
        lines.append(
            f"{ev.t},{ev.trigger.label},{format_float(ev.mean_value)},{format_float(ev.std_value)},"
            f"{format_float(thr.mean_thr)},{format_float(thr.std_thr)}"
        )
    return "\n".join(lines) + "\n"


def emit_alarms(events: Sequence[AlarmEvent], thr: Thresholds, path: str | Path) -> None:
    Path(path).write_text(format_alarms(events, thr), encoding="utf-8", newline="\n")
