from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from flowfault.core import IndexedSeries
from flowfault.errors import (
    CorruptFile,
    EmptyStats,
    NoOverlap,
    UnsortedEvents,
    VersionMismatch,
    WindowTooLarge,
    WindowTooSmall,
)
from flowfault.residue import (
    ALARMS_HEADER,
    AlarmEvent,
    Episode,
    ResidueStats,
    RollingMonitor,
    Thresholds,
    Trigger,
    calibrate,
    detect,
    format_alarms,
    merge_episodes,
    residue,
    rolling_stats,
)

residues = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False), min_size=2, max_size=60
)


def exact_stats(values, w):
    """|mean| and population sd of every trailing window, in exact rationals."""
    fr = [Fraction(v) for v in values]
    out = []
    for i in range(len(fr) - w + 1):
        win = fr[i : i + w]
        m = sum(win) / w
        var = sum((x - m) ** 2 for x in win) / w
        out.append((abs(float(m)), math.sqrt(float(var))))
    return out


def test_residue_example():
    r = residue(IndexedSeries(0, [1.0, 2.0, 3.0]), IndexedSeries(1, [1.5, 2.0]))
    assert (r.start, r.residues.tolist()) == (1, [0.5, 1.0])
    with pytest.raises(NoOverlap):
        residue(IndexedSeries(0, [1.0]), IndexedSeries(5, [1.0]))


def test_rolling_stats_example():
    st_ = rolling_stats(IndexedSeries(10, [1.0, -1.0, 1.0, 3.0]), 2)
    assert st_.start == 11
    assert st_.mean_stat.tolist() == [0.0, 0.0, 2.0]
    assert st_.std_stat.tolist() == [1.0, 1.0, 1.0]


def test_rolling_stats_window_bounds():
    with pytest.raises(WindowTooSmall):
        rolling_stats(IndexedSeries(0, [1.0, 2.0]), 1)
    with pytest.raises(WindowTooLarge):
        rolling_stats(IndexedSeries(0, [1.0, 2.0]), 3)


@settings(max_examples=80, deadline=None)
@given(values=residues, data=st.data())
def test_rolling_stats_match_exact_rationals(values, data):
    w = data.draw(st.integers(2, len(values)))
    got = rolling_stats(IndexedSeries(0, values), w)
    for (m, s), gm, gs in zip(exact_stats(values, w), got.mean_stat, got.std_stat):
        assert gm == pytest.approx(m, rel=1e-12, abs=0)
        assert gs == pytest.approx(s, rel=1e-12, abs=1e-300)


def test_mean_stat_is_not_mean_abs():
    # zero-mean alternating noise: |mean| stays 0 whatever its amplitude
    st_ = rolling_stats(IndexedSeries(0, np.tile([5.0, -5.0], 20)), 10)
    assert np.all(st_.mean_stat == 0.0)
    assert np.all(st_.std_stat == 5.0)


def test_constant_offset_moves_mean_only():
    rng = np.random.default_rng(0)
    r = rng.standard_normal(500)
    a = rolling_stats(IndexedSeries(0, r), 25)
    b = rolling_stats(IndexedSeries(0, r + 3.0), 25)
    np.testing.assert_allclose(b.std_stat, a.std_stat, rtol=1e-9)
    assert np.all(b.mean_stat > a.mean_stat)


def test_calibrate_example():
    stats = ResidueStats(start=9, window_w=10, mean_stat=[0.1, 0.4, 0.2], std_stat=[1.0, 0.5, 2.0])
    thr = calibrate(stats)
    assert (thr.mean_thr, thr.std_thr, thr.window_w) == (0.4, 2.0, 10)
    assert thr.calibration_range == (0, 12)
    thr2 = calibrate(stats, 1.5)
    assert thr2.mean_thr == pytest.approx(0.6) and thr2.std_thr == 3.0
    with pytest.raises(ValueError):
        calibrate(stats, 0.5)
    with pytest.raises(EmptyStats):
        calibrate(ResidueStats(0, 10, [], []))


def test_detect_example():
    stats = ResidueStats(start=100, window_w=2, mean_stat=[0.1, 0.6, 0.5, 0.7], std_stat=[1.0, 1.0, 2.5, 3.0])
    thr = Thresholds(mean_thr=0.5, std_thr=2.0, window_w=2)
    events = detect(stats, thr)
    assert [(e.t, e.trigger) for e in events] == [(101, Trigger.MEAN), (102, Trigger.STD), (103, Trigger.BOTH)]
    assert events[0].mean_value == 0.6


@settings(max_examples=40, deadline=None)
@given(values=residues, sf=st.floats(1.0, 10.0))
def test_calibration_data_never_alarms(values, sf):
    w = min(5, len(values))
    stats = rolling_stats(IndexedSeries(0, values), w)
    assert detect(stats, calibrate(stats, sf)) == []


@settings(max_examples=40, deadline=None)
@given(values=residues, sf1=st.floats(1.0, 5.0), sf2=st.floats(1.0, 5.0), data=st.data())
def test_larger_safety_factor_never_adds_alarms(values, sf1, sf2, data):
    lo, hi = sorted((sf1, sf2))
    w = min(4, len(values))
    cal = rolling_stats(IndexedSeries(0, values), w)
    test_values = data.draw(residues.filter(lambda v: len(v) >= w))
    stats = rolling_stats(IndexedSeries(0, test_values), w)
    loose = {e.t for e in detect(stats, calibrate(cal, lo))}
    tight = {e.t for e in detect(stats, calibrate(cal, hi))}
    assert tight <= loose


def test_trigger_labels():
    assert [t.label for t in (Trigger.MEAN, Trigger.STD, Trigger.BOTH)] == ["mean", "std", "both"]
    assert Trigger.MEAN | Trigger.STD is Trigger.BOTH
    assert all(Trigger.from_label(t.label) is t for t in (Trigger.MEAN, Trigger.STD, Trigger.BOTH))


def _ev(t, trigger=Trigger.MEAN):
    return AlarmEvent(t, trigger, 0.0, 0.0)


def test_merge_episodes_example():
    events = [_ev(1), _ev(2, Trigger.STD), _ev(4), _ev(10), _ev(11)]
    assert merge_episodes(events, gap=2) == [Episode(1, 4, Trigger.BOTH), Episode(10, 11, Trigger.MEAN)]
    assert merge_episodes(events, gap=0) == [Episode(t, t, e.trigger) for t, e in zip([1, 2, 4, 10, 11], events)]
    assert merge_episodes([], 5) == []
    with pytest.raises(UnsortedEvents):
        merge_episodes([_ev(3), _ev(1)], 5)


@given(ts=st.lists(st.integers(0, 200), unique=True, max_size=30), gap=st.integers(0, 20))
def test_episodes_cover_events(ts, gap):
    ts.sort()
    episodes = merge_episodes([_ev(t) for t in ts], gap)
    assert sum(1 for t in ts for ep in episodes if ep.start <= t <= ep.end) == len(ts)
    for a, b in zip(episodes, episodes[1:]):
        assert b.start - a.end > gap


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), w=st.integers(2, 30))
def test_streaming_monitor_matches_batch(seed, w):
    rng = np.random.default_rng(seed)
    r = rng.standard_normal(300)
    r[150:] += 1.5
    res = IndexedSeries(40, r)
    cal = rolling_stats(IndexedSeries(0, rng.standard_normal(200)), w)
    thr = calibrate(cal)
    stats = rolling_stats(res, w)
    # skip the rare case of a statistic within rounding of its threshold
    assume(np.min(np.abs(stats.mean_stat - thr.mean_thr)) > 1e-12)
    assume(np.min(np.abs(stats.std_stat - thr.std_thr)) > 1e-12)
    batch = detect(stats, thr)
    monitor = RollingMonitor(thr)
    streamed = [ev for t, v in res if (ev := monitor.push(t, v)) is not None]
    assert [(e.t, e.trigger) for e in streamed] == [(e.t, e.trigger) for e in batch]
    for a, b in zip(streamed, batch):
        assert a.mean_value == pytest.approx(b.mean_value, rel=1e-12, abs=1e-15)
        assert a.std_value == pytest.approx(b.std_value, rel=1e-12)


def test_thresholds_round_trip(tmp_path):
    thr = Thresholds(0.1 + 0.2, 1 / 3, 50, 1.25, (8000, 16000))
    path = tmp_path / "thr.json"
    thr.save(path)
    assert Thresholds.load(path) == thr


def test_thresholds_file_errors():
    with pytest.raises(CorruptFile):
        Thresholds.from_json("{")
    with pytest.raises(CorruptFile):
        Thresholds.from_json('{"format": "other"}')
    text = Thresholds(1.0, 2.0, 5).to_json().replace('"format_version": 1', '"format_version": 2')
    with pytest.raises(VersionMismatch):
        Thresholds.from_json(text)


def test_format_alarms():
    thr = Thresholds(0.5, 2.0, 2)
    text = format_alarms([AlarmEvent(7, Trigger.BOTH, 0.75, 2.5)], thr)
    assert text == ALARMS_HEADER + "\n7,both,0.75,2.5,0.5,2.0\n"
    assert format_alarms([], thr) == ALARMS_HEADER + "\n"
