"""Synthetic sensor faults with ground-truth masks.

Four synthetic fault types (complete failure, precision degradation, drift,
bias) and emulations of two field faults: a closed gamma-ray shutter (sudden
level drop) and an unplugged communication cable (the last recorded sequence
replayed over and over).

Faults target ``g`` by default. Faulting ``c`` is allowed for experiments,
but an exogenous forecaster reads ``c``, so the residue then no longer
isolates the fault.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import CHANNELS, SeriesPair, nominal_sd
from .errors import InvalidSpec, ReplayWindowUnavailable

log = logging.getLogger(__name__)

_STREAM_TAG = 0xFA17


@dataclass(frozen=True)
class CompleteFailure:
    """Sensor output pinned to a constant ``floor``."""

    floor: float = 0.0


@dataclass(frozen=True)
class PrecisionDegradation:
    """Extra gaussian noise so the total noise sd is about ``noise_sd_mult`` times nominal.

    The added sd is ``(noise_sd_mult - 1) * nominal_sd`` where the nominal sd
    comes from first differences of the pre-fault data.
    """

    noise_sd_mult: float = 3.0


@dataclass(frozen=True)
class Drift:
    """Offset growing linearly: ``slope * (t - start)``."""

    slope: float = 0.0


@dataclass(frozen=True)
class Bias:
    offset: float = 0.0


@dataclass(frozen=True)
class ShutterDrop:
    """Negative step of size ``drop``: the density reading collapses."""

    drop: float = 1.0


@dataclass(frozen=True)
class StuckReplay:
    """The ``replay_len`` samples before onset repeat periodically."""

    replay_len: int = 100


FaultKind = Union[CompleteFailure, PrecisionDegradation, Drift, Bias, ShutterDrop, StuckReplay]

FAULT_KINDS: dict[str, type] = {
    "complete_failure": CompleteFailure,
    "precision_degradation": PrecisionDegradation,
    "drift": Drift,
    "bias": Bias,
    "shutter_drop": ShutterDrop,
    "stuck_replay": StuckReplay,
}


def fault_name(kind: FaultKind) -> str:
    for name, cls in FAULT_KINDS.items():
        if isinstance(kind, cls):
            return name
    raise TypeError(f"not a fault kind: {kind!r}")


@dataclass(frozen=True)
class FaultSpec:
    kind: FaultKind
    start: int
    duration: int | None = None  # None: until the end of the series
    channel: str = "g"
    seed: int = 0

    def end(self, pair: SeriesPair) -> int:
        return pair.stop if self.duration is None else self.start + self.duration

    def validate(self, pair: SeriesPair) -> None:
        if self.channel not in CHANNELS:
            raise InvalidSpec(f"channel must be one of {CHANNELS}, got {self.channel!r}")
        if not pair.start <= self.start < pair.stop:
            raise InvalidSpec(f"fault start {self.start} outside series [{pair.start}, {pair.stop})")
        if self.duration is not None and (self.duration < 1 or self.start + self.duration > pair.stop):
            raise InvalidSpec(f"fault range [{self.start}, {self.start + self.duration}) not within series")
        kind = self.kind
        if isinstance(kind, PrecisionDegradation) and not kind.noise_sd_mult > 1:
            raise InvalidSpec("noise_sd_mult must be > 1")
        if isinstance(kind, ShutterDrop) and not kind.drop > 0:
            raise InvalidSpec("drop must be > 0")
        if isinstance(kind, StuckReplay) and kind.replay_len < 1:
            raise InvalidSpec("replay_len must be >= 1")
        for value in vars(kind).values():
            if not math.isfinite(value):
                raise InvalidSpec(f"fault parameters must be finite: {kind!r}")


def inject(pair: SeriesPair, spec: FaultSpec) -> tuple[SeriesPair, np.ndarray]:
    """Faulted copy of ``pair`` and the boolean mask of faulted samples.

    Only ``spec.channel`` on ``[start, start + duration)`` changes. The mask
    is also stored on the returned series (merged with any existing mask).
    """
    spec.validate(pair)
    if spec.channel == "c":
        log.warning("injecting into the leading channel c; exogenous residues will follow the fault")
    original = pair.channel(spec.channel)
    values = original.copy()
    a, b = spec.start - pair.start, spec.end(pair) - pair.start
    kind = spec.kind
    steps = np.arange(b - a)

    if isinstance(kind, CompleteFailure):
        values[a:b] = kind.floor
    elif isinstance(kind, PrecisionDegradation):
        if a < 3:
            raise InvalidSpec("precision degradation needs at least 3 pre-fault samples to estimate the nominal sd")
        sd = (kind.noise_sd_mult - 1.0) * nominal_sd(original[:a])
        rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed, spawn_key=(_STREAM_TAG,))))
        values[a:b] += sd * rng.standard_normal(b - a)
    elif isinstance(kind, Drift):
        values[a:b] += kind.slope * steps
    elif isinstance(kind, Bias):
        values[a:b] += kind.offset
    elif isinstance(kind, ShutterDrop):
        values[a:b] -= kind.drop
    elif isinstance(kind, StuckReplay):
        length = kind.replay_len
        if a < length:
            raise ReplayWindowUnavailable(
                f"replay of {length} samples needs start >= {pair.start + length}, got {spec.start}"
            )
        values[a:b] = original[a - length + steps % length]
    else:
        raise InvalidSpec(f"unknown fault kind {kind!r}")

    mask = np.zeros(len(pair), dtype=bool)
    mask[a:b] = True
    merged = mask if pair.fault is None else (mask | pair.fault)
    faulted = pair.replace(**{spec.channel: values}, fault=merged)
    return faulted, mask
