"""Domain types, CSV ingestion/emission, windowing and splitting.

A series is a run of paired samples of the leading sensor ``c`` (electrical
impedance) and the target sensor ``g`` (gamma-ray absorption) on a uniform
integer index ``t``. All index arguments in this package are *absolute*
sample indices, not offsets into an array.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import IndexGap, InvalidSplit, MalformedRow, NonFinite, OutOfRange

CHANNELS = ("c", "g")


class Record(NamedTuple):
    t: int
    c: float
    g: float


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SeriesPair:
    """Paired C/G samples on a gap-free integer index.

    Arrays are stored read-only so instances can be shared freely. ``fault``
    is the optional ground-truth mask carried by faulted data.
    """

    t: np.ndarray
    c: np.ndarray
    g: np.ndarray
    name: str = ""
    fault: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.t, dtype=np.int64).copy()
        c = np.asarray(self.c, dtype=np.float64).copy()
        g = np.asarray(self.g, dtype=np.float64).copy()
        if t.ndim != 1 or c.shape != t.shape or g.shape != t.shape:
            raise ValueError("t, c and g must be 1-d arrays of equal length")
        if t.size == 0:
            raise ValueError("a SeriesPair must contain at least one record")
        steps = np.diff(t)
        if steps.size and not np.all(steps == 1):
            k = int(np.flatnonzero(steps != 1)[0])
            raise IndexGap(f"index jumps from t={t[k]} to t={t[k + 1]}")
        object.__setattr__(self, "t", _frozen(t))
        object.__setattr__(self, "c", _frozen(c))
        object.__setattr__(self, "g", _frozen(g))
        if self.fault is not None:
            fault = np.asarray(self.fault, dtype=bool).copy()
            if fault.shape != t.shape:
                raise ValueError("fault mask length must equal series length")
            object.__setattr__(self, "fault", _frozen(fault))

    @classmethod
    def from_arrays(cls, c, g, start: int = 0, name: str = "", fault=None) -> SeriesPair:
        c = np.asarray(c, dtype=np.float64)
        return cls(np.arange(start, start + c.size), c, g, name, fault)

    @classmethod
    def from_records(cls, records: Sequence[Record], name: str = "") -> SeriesPair:
        if not records:
            raise ValueError("a SeriesPair must contain at least one record")
        t, c, g = zip(*records)
        return cls(np.array(t), np.array(c), np.array(g), name)

    def __len__(self) -> int:
        return int(self.t.size)

    @property
    def start(self) -> int:
        return int(self.t[0])

    @property
    def stop(self) -> int:
        """One past the last index."""
        return int(self.t[-1]) + 1

    @property
    def records(self) -> list[Record]:
        return [Record(int(t), float(c), float(g)) for t, c, g in zip(self.t, self.c, self.g)]

    def channel(self, name: str) -> np.ndarray:
        if name not in CHANNELS:
            raise ValueError(f"unknown channel {name!r}; expected one of {CHANNELS}")
        return self.c if name == "c" else self.g

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.c).all() and np.isfinite(self.g).all())

    def slice(self, start: int, stop: int) -> SeriesPair:
        """Sub-series on the absolute half-open range ``[start, stop)``."""
        if not (self.start <= start < stop <= self.stop):
            raise OutOfRange(f"range [{start}, {stop}) not within [{self.start}, {self.stop})")
        a, b = start - self.start, stop - self.start
        fault = None if self.fault is None else self.fault[a:b]
        return SeriesPair(self.t[a:b], self.c[a:b], self.g[a:b], self.name, fault)

    def replace(self, *, c=None, g=None, fault=None, name=None) -> SeriesPair:
        return SeriesPair(
            self.t,
            self.c if c is None else c,
            self.g if g is None else g,
            self.name if name is None else name,
            self.fault if fault is None else fault,
        )

    def target(self) -> IndexedSeries:
        """The target channel ``g`` as an indexed series."""
        return IndexedSeries(self.start, self.g)


@dataclass(frozen=True, eq=False)
class IndexedSeries:
    """A run of values starting at absolute index ``start``.

    Used for forecasts (value at ``t`` is the forecast of ``g(t)``), residues
    and any other per-sample quantity.
    """

    start: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("values must be 1-d")
        object.__setattr__(self, "start", int(self.start))
        object.__setattr__(self, "values", _frozen(values))

    def __len__(self) -> int:
        return int(self.values.size)

    def __iter__(self) -> Iterator[tuple[int, float]]:
        for i, v in enumerate(self.values):
            yield self.start + i, float(v)

    @property
    def stop(self) -> int:
        return self.start + len(self)

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.start, self.stop)

    def restrict(self, start: int, stop: int) -> IndexedSeries:
        """Clip to the intersection with ``[start, stop)`` (may be empty)."""
        a = max(start, self.start)
        b = max(a, min(stop, self.stop))
        return type(self)(a, self.values[a - self.start : b - self.start])


def overlap(a: IndexedSeries, b: IndexedSeries) -> tuple[int, int]:
    """Absolute half-open intersection of two indexed series; may be empty."""
    lo = max(a.start, b.start)
    return lo, max(lo, min(a.stop, b.stop))


@dataclass(frozen=True)
class SplitSpec:
    """Half-open absolute index ranges ``(start, stop)`` for the three phases.

    The calibration range is assumed fault-free; thresholds are learned there.
    """

    train: tuple[int, int]
    calibrate: tuple[int, int]
    test: tuple[int, int]

    def validate(self, series: SeriesPair) -> None:
        ranges = [("train", self.train), ("calibrate", self.calibrate), ("test", self.test)]
        for label, (a, b) in ranges:
            if not a < b:
                raise InvalidSplit(f"{label} range [{a}, {b}) is empty or reversed")
            if a < series.start or b > series.stop:
                raise InvalidSplit(
                    f"{label} range [{a}, {b}) outside series bounds [{series.start}, {series.stop})"
                )
        for (l1, r1), (l2, r2) in zip(ranges, ranges[1:]):
            if r1[1] > r2[0]:
                raise InvalidSplit(f"{l1} range {r1} overlaps or follows {l2} range {r2}")


def split(series: SeriesPair, spec: SplitSpec) -> tuple[SeriesPair, SeriesPair, SeriesPair]:
    spec.validate(series)
    return (
        series.slice(*spec.train),
        series.slice(*spec.calibrate),
        series.slice(*spec.test),
    )


def window(series: SeriesPair, t: int, n: int, channel: str = "g") -> np.ndarray:
    """Values of ``channel`` at indices ``t-n .. t`` inclusive, oldest first."""
    if n < 0:
        raise ValueError("window length n must be >= 0")
    if t - n < series.start or t >= series.stop:
        raise OutOfRange(
            f"window [{t - n}, {t}] not within series [{series.start}, {series.stop - 1}]"
        )
    a = t - n - series.start
    return series.channel(channel)[a : a + n + 1].copy()


def nominal_sd(values: np.ndarray) -> float:
    """Noise scale estimated from first differences, ``sd(diff(x)) / sqrt(2)``.

    Insensitive to slow level changes, so it tracks the sample-to-sample
    noise rather than the signal's overall spread.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 3:
        raise ValueError("need at least 3 samples to estimate a nominal sd")
    return float(np.std(np.diff(values)) / math.sqrt(2.0))


# --- CSV -------------------------------------------------------------------

def format_float(x: float) -> str:
    """Shortest round-trip decimal representation."""
    return repr(float(x))


def _parse_float(text: str, lineno: int, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise MalformedRow(f"line {lineno}: non-numeric {column} value {text!r}") from None


def _parse_int(text: str, lineno: int, column: str) -> int:
    try:
        return int(text, 10)
    except ValueError:
        raise MalformedRow(f"line {lineno}: non-integer {column} value {text!r}") from None


def parse_csv(text: str, name: str = "", clean: bool = True) -> SeriesPair:
    """Parse ``t,c,g[,fault]`` CSV text.

    With ``clean=True`` any NaN/Inf sample raises :class:`NonFinite`.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow("empty file: missing header row") from None
    header = [h.strip() for h in header]
    if header not in (["t", "c", "g"], ["t", "c", "g", "fault"]):
        raise MalformedRow(f"line 1: expected header 't,c,g' or 't,c,g,fault', got {','.join(header)!r}")
    has_fault = len(header) == 4
    ts, cs, gs, fs = [], [], [], []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise MalformedRow(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
        t = _parse_int(row[0], lineno, "t")
        c = _parse_float(row[1], lineno, "c")
        g = _parse_float(row[2], lineno, "g")
        if clean and not (math.isfinite(c) and math.isfinite(g)):
            raise NonFinite(f"line {lineno}: non-finite sample at t={t}")
        if ts and t != ts[-1] + 1:
            raise IndexGap(f"line {lineno}: index jumps from t={ts[-1]} to t={t}")
        ts.append(t)
        cs.append(c)
        gs.append(g)
        if has_fault:
            flag = row[3].strip()
            if flag not in ("0", "1"):
                raise MalformedRow(f"line {lineno}: fault flag must be 0 or 1, got {flag!r}")
            fs.append(flag == "1")
    if not ts:
        raise MalformedRow("file contains a header but no records")
    return SeriesPair(np.array(ts), np.array(cs), np.array(gs), name, np.array(fs) if has_fault else None)


def load_csv(path: str | Path, clean: bool = True) -> SeriesPair:
    path = Path(path)
    return parse_csv(path.read_text(encoding="utf-8"), name=path.stem, clean=clean)


def format_csv(series: SeriesPair) -> str:
    has_fault = series.fault is not None
    lines = ["t,c,g,fault" if has_fault else "t,c,g"]
    for i in range(len(series)):
        row = f"{int(series.t[i])},{format_float(series.c[i])},{format_float(series.g[i])}"
        if has_fault:
            row += ",1" if series.fault[i] else ",0"
        lines.append(row)
    return "\n".join(lines) + "\n"


def emit_csv(series: SeriesPair, path: str | Path) -> None:
    Path(path).write_text(format_csv(series), encoding="utf-8", newline="\n")
