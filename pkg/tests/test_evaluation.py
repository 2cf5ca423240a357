from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from flowfault.core import IndexedSeries, SeriesPair
from flowfault.errors import NoCommonRange, NoFaultInMask
from flowfault.evaluation import (
    COMPARISON_HEADER,
    DETECTION_HEADER,
    TRACE_HEADER,
    ComparisonReport,
    ComparisonRow,
    DetectionReport,
    compare_models,
    detection_report,
    emit_report,
    format_comparison,
    format_detection,
    format_trace,
    mse,
)
from flowfault.forecasters import TrainedModel
from flowfault.residue import AlarmEvent, ResidueStats, Thresholds, Trigger


def test_mse_example():
    assert mse(IndexedSeries(0, [1.0, 2.0, 3.0]), IndexedSeries(1, [2.0, 5.0])) == 2.0


@given(pairs=st.lists(st.tuples(st.integers(-1000, 1000), st.integers(-1000, 1000)), min_size=1, max_size=50))
def test_mse_matches_exact_mean(pairs):
    a, f = zip(*pairs)
    exact = sum(Fraction(x - y) ** 2 for x, y in pairs) / len(pairs)
    got = mse(IndexedSeries(0, np.array(a, float) / 8), IndexedSeries(0, np.array(f, float) / 8))
    assert got == pytest.approx(float(exact / 64), rel=1e-14)


def test_compare_models_common_range():
    c = np.arange(20.0)
    g = np.concatenate([[0.0, 0.0], c[:-2]])  # g(t) = c(t - 2)
    s = SeriesPair.from_arrays(c, g)
    report = compare_models(s, [TrainedModel.naive(), TrainedModel.hard_subtraction(2)], (4, 20))
    assert report.rows[0] == ComparisonRow("naive", 1.0, (4, 20))
    assert report.by_name() == {"naive": 1.0, "hard_subtraction": 0.0}
    # the range is clipped to where every model can forecast
    assert compare_models(s, [TrainedModel.hard_subtraction(3)], (0, 20)).rows[0].test_range == (3, 20)
    with pytest.raises(NoCommonRange):
        compare_models(s, [TrainedModel.hard_subtraction(5)], (0, 5))


def test_compare_models_order_does_not_change_scores():
    rng = np.random.default_rng(0)
    s = SeriesPair.from_arrays(rng.standard_normal(200), rng.standard_normal(200))
    models = [TrainedModel.naive(), TrainedModel.hard_subtraction(1), TrainedModel.hard_subtraction(7)]
    forward = compare_models(s, models, (50, 200)).rows
    backward = compare_models(s, models[::-1], (50, 200)).rows
    assert list(forward) == list(backward[::-1])


def _ev(t, trigger=Trigger.MEAN):
    return AlarmEvent(t, trigger, 0.0, 0.0)


def test_detection_report_example():
    mask = np.zeros(100, dtype=bool)
    mask[40:60] = True
    events = [_ev(5), _ev(20), _ev(45, Trigger.STD), _ev(50, Trigger.MEAN), _ev(70, Trigger.MEAN)]
    rep = detection_report(events, mask, warmup=10)
    assert rep == DetectionReport(40, 45, 5, Trigger.BOTH, 1)
    assert rep.trigger_labels == ["mean", "std"]


def test_detection_report_without_alarm():
    mask = np.zeros(10, dtype=bool)
    mask[3] = True
    rep = detection_report([], mask, warmup=0, mask_start=100)
    assert (rep.fault_start, rep.first_alarm, rep.latency, rep.triggers_seen) == (103, None, None, None)
    assert format_detection(rep) == DETECTION_HEADER + "\n103,,,,0\n"
    with pytest.raises(NoFaultInMask):
        detection_report([], np.zeros(5, dtype=bool), warmup=0)


def test_emit_reports(tmp_path):
    comparison = ComparisonReport((ComparisonRow("naive", 0.25, (3, 9)), ComparisonRow("tcn_exo", 0.1, (3, 9))))
    assert format_comparison(comparison) == COMPARISON_HEADER + "\nnaive,0.25,3,9\ntcn_exo,0.1,3,9\n"
    path = tmp_path / "c.csv"
    emit_report(comparison, path)
    first = path.read_bytes()
    emit_report(comparison, path)
    assert path.read_bytes() == first
    emit_report(DetectionReport(10, 12, 2, Trigger.MEAN, 0), path)
    assert path.read_text() == DETECTION_HEADER + "\n10,12,2,mean,0\n"
    with pytest.raises(TypeError):
        emit_report("nope", path)


def test_format_trace():
    actual = IndexedSeries(0, [1.0, 2.0, 3.0, 4.0])
    forecast = IndexedSeries(1, [1.5, 2.5, 3.5])
    stats = ResidueStats(2, 2, [0.5, 0.5], [0.0, 0.0])
    thr = Thresholds(0.25, 1.0, 2)
    text = format_trace(actual, forecast, stats, thr, [_ev(3)], (0, 4))
    assert text.splitlines() == [
        TRACE_HEADER,
        "0,1.0,,,,,0.25,1.0,",
        "1,2.0,1.5,0.5,,,0.25,1.0,",
        "2,3.0,2.5,0.5,0.5,0.0,0.25,1.0,",
        "3,4.0,3.5,0.5,0.5,0.0,0.25,1.0,mean",
    ]
