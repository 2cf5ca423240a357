from __future__ import annotations

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowfault.core import SeriesPair, nominal_sd
from flowfault.errors import InvalidSpec, ReplayWindowUnavailable
from flowfault.faults import (
    FAULT_KINDS,
    Bias,
    CompleteFailure,
    Drift,
    FaultSpec,
    PrecisionDegradation,
    ShutterDrop,
    StuckReplay,
    fault_name,
    inject,
)
from flowfault.simulator import SimConfig, generate

ALL_KINDS = [
    CompleteFailure(0.5),
    PrecisionDegradation(3.0),
    Drift(0.01),
    Bias(1.0),
    ShutterDrop(2.0),
    StuckReplay(10),
]


@pytest.fixture(scope="module")
def pair():
    return generate(SimConfig(length=400, seed=11))


def ramp(n=20, start=0):
    return SeriesPair.from_arrays(np.arange(n, dtype=float) * -1, np.arange(n, dtype=float), start=start)


def test_examples():
    s = ramp()
    cases = [
        (CompleteFailure(-1.0), [-1.0] * 5),
        (Drift(0.5), [10.0, 11.5, 13.0, 14.5, 16.0]),
        (Bias(2.0), [12.0, 13.0, 14.0, 15.0, 16.0]),
        (ShutterDrop(3.0), [7.0, 8.0, 9.0, 10.0, 11.0]),
        (StuckReplay(3), [7.0, 8.0, 9.0, 7.0, 8.0]),
    ]
    for kind, expected in cases:
        out, mask = inject(s, FaultSpec(kind, start=10, duration=5))
        assert out.g[10:15].tolist() == expected, fault_name(kind)
        assert np.array_equal(out.g[:10], s.g[:10]) and np.array_equal(out.g[15:], s.g[15:])
        assert np.array_equal(out.c, s.c)
        assert mask.tolist() == [False] * 10 + [True] * 5 + [False] * 5
        assert out.fault.tolist() == mask.tolist()


def test_open_ended_fault_runs_to_end():
    out, mask = inject(ramp(start=100), FaultSpec(Bias(1.0), start=115))
    assert mask.sum() == 5 and mask[-1]
    assert out.g[-1] == 20.0


def test_precision_degradation_noise_scale():
    rng = np.random.default_rng(0)
    g = 0.5 * rng.standard_normal(40_000)
    s = SeriesPair.from_arrays(np.zeros_like(g), g)
    out, _ = inject(s, FaultSpec(PrecisionDegradation(3.0), start=20_000, seed=5))
    added = out.g[20_000:] - g[20_000:]
    # added sd is (mult - 1) times the nominal sd of the pre-fault data
    assert np.std(added) == pytest.approx(2.0 * nominal_sd(g[:20_000]), rel=0.02)
    assert np.mean(added) == pytest.approx(0.0, abs=0.02)


def test_fault_noise_is_seeded(pair):
    spec = FaultSpec(PrecisionDegradation(2.0), start=20, seed=3)
    other = FaultSpec(PrecisionDegradation(2.0), start=20, seed=4)
    assert np.array_equal(inject(pair, spec)[0].g, inject(pair, spec)[0].g)
    assert not np.array_equal(inject(pair, spec)[0].g, inject(pair, other)[0].g)


@pytest.mark.parametrize(
    "spec",
    [
        FaultSpec(Bias(1.0), start=25),
        FaultSpec(Bias(1.0), start=-1),
        FaultSpec(Bias(1.0), start=10, duration=0),
        FaultSpec(Bias(1.0), start=10, duration=11),
        FaultSpec(Bias(1.0), start=10, channel="x"),
        FaultSpec(PrecisionDegradation(1.0), start=10),
        FaultSpec(ShutterDrop(0.0), start=10),
        FaultSpec(StuckReplay(0), start=10),
        FaultSpec(Drift(float("nan")), start=10),
    ],
)
def test_invalid_specs(spec):
    with pytest.raises(InvalidSpec):
        inject(ramp(), spec)


def test_replay_needs_history():
    with pytest.raises(ReplayWindowUnavailable):
        inject(ramp(), FaultSpec(StuckReplay(11), start=10))


def test_fault_on_leading_channel_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="flowfault"):
        out, _ = inject(ramp(), FaultSpec(Bias(1.0), start=10, channel="c"))
    assert "leading channel" in caplog.text
    assert out.c[10] == -9.0 and np.array_equal(out.g, ramp().g)


def test_mask_merges_with_existing():
    first, _ = inject(ramp(), FaultSpec(Bias(1.0), start=2, duration=2))
    second, mask = inject(first, FaultSpec(Bias(1.0), start=10, duration=2))
    assert mask.sum() == 2
    assert np.flatnonzero(second.fault).tolist() == [2, 3, 10, 11]


def test_registry_names():
    assert {fault_name(k) for k in ALL_KINDS} == set(FAULT_KINDS)


@settings(max_examples=60, deadline=None)
@given(
    kind=st.sampled_from(ALL_KINDS),
    start=st.integers(20, 390),
    duration=st.one_of(st.none(), st.integers(1, 10)),
    channel=st.sampled_from(["c", "g"]),
)
def test_only_selected_channel_and_range_change(pair, kind, start, duration, channel):
    spec = FaultSpec(kind, start=start, duration=duration, channel=channel)
    out, mask = inject(pair, spec)
    other = "g" if channel == "c" else "c"
    assert np.array_equal(out.channel(other), pair.channel(other))
    changed = out.channel(channel) != pair.channel(channel)
    assert not np.any(changed & ~mask)
    assert mask.sum() == spec.end(pair) - start


@given(
    values=st.lists(st.integers(-(2**20), 2**20), min_size=5, max_size=40),
    b=st.integers(-(2**20), 2**20),
    data=st.data(),
)
def test_bias_then_inverse_bias_restores(values, b, data):
    # dyadic values and offsets: every addition is exact
    g = np.array(values, dtype=float) / 64
    s = SeriesPair.from_arrays(np.zeros_like(g), g)
    start = data.draw(st.integers(0, len(g) - 1))
    once, _ = inject(s, FaultSpec(Bias(b / 8), start=start))
    back, _ = inject(once, FaultSpec(Bias(-b / 8), start=start))
    assert back.g.tobytes() == s.g.tobytes()


@given(replay_len=st.integers(1, 30), extra=st.integers(0, 50), duration=st.integers(1, 120))
def test_replay_is_periodic_copy(replay_len, extra, duration):
    n = replay_len + extra + duration
    s = ramp(n, start=7)
    start = s.start + replay_len + extra
    out, _ = inject(s, FaultSpec(StuckReplay(replay_len), start=start, duration=duration))
    a = start - s.start
    # brute force: the sample i steps into the fault is the one replay_len before, cycled
    for i in range(duration):
        assert out.g[a + i] == s.g[a - replay_len + i % replay_len]
    seg = out.g[a : a + duration]
    if duration > replay_len:
        assert np.array_equal(seg[replay_len:], seg[:-replay_len])
