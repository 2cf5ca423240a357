"""Run configuration: a flat ``key = value`` file with section prefixes.

Blank lines and ``#`` comments are ignored. Unknown or repeated keys are
rejected. Every key has a default (see :data:`KEYS`), so an empty file is a
valid configuration. The top-level ``seed`` feeds the simulator, the TCN
and the fault generator; each derives its own independent stream from it.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

from .core import SplitSpec
from .errors import InvalidConfig
from .faults import FAULT_KINDS, FaultSpec
from .forecasters import Mode, Tcn, TcnConfig
from .simulator import SimConfig

REF_CONFIG = "ref.cfg"


def _range(text: str) -> tuple[int, int]:
    a, sep, b = text.partition(":")
    if not sep:
        raise ValueError(f"expected 'start:stop', got {text!r}")
    return int(a), int(b)


def _lag(text: str) -> int | None:
    return None if text == "auto" else int(text)


def _choice(*options: str) -> Callable[[str], str]:
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {text!r}")
        return text

    return parse


MODEL_NAMES = ("naive", "hard_subtraction", "tcn_endo", "tcn_exo")

# key -> (parser, default, description)
KEYS: dict[str, tuple[Callable[[str], Any], str, str]] = {
    "seed": (int, "1", "master seed for simulation, TCN training and fault noise"),
    "data.path": (str, "", "input CSV (t,c,g); empty means simulate from sim.*"),
    "sim.length": (int, "20000", "number of samples"),
    "sim.lag_m": (int, "3", "samples by which C leads G"),
    "sim.ar_coeff": (float, "0.6", "latent AR(1) coefficient"),
    "sim.latent_level": (float, "2.0", "latent mean level"),
    "sim.latent_noise_sd": (float, "0.5", "latent innovation sd"),
    "sim.gain": (float, "1.0", "G = gain * s + offset"),
    "sim.offset": (float, "0.0", "G = gain * s + offset"),
    "sim.obs_noise_sd_c": (float, "0.3", "C observation noise sd"),
    "sim.obs_noise_sd_g": (float, "0.3", "G observation noise marginal sd"),
    "sim.obs_noise_ar_g": (float, "0.95", "AR(1) coefficient of G observation noise"),
    "sim.burst_amplitude": (float, "2.0", "burst size added to the latent innovation"),
    "sim.burst_rate": (float, "0.01", "per-sample burst probability"),
    "split.train": (_range, "0:8000", "training range start:stop"),
    "split.calibrate": (_range, "8000:16000", "fault-free threshold calibration range"),
    "split.test": (_range, "16000:20000", "evaluation range"),
    "tcn.input_window_n": (int, "32", "history length n (window holds n+1 samples)"),
    "tcn.channels": (int, "8", "hidden channels per convolution"),
    "tcn.kernel_size": (int, "2", "convolution kernel size"),
    "tcn.num_blocks": (int, "4", "residual blocks; dilation doubles per block"),
    "tcn.learning_rate": (float, "0.003", "Adam step size"),
    "tcn.epochs": (int, "8", "training epochs"),
    "tcn.batch_size": (int, "64", "mini-batch size"),
    "tcn.dropout_rate": (float, "0.0", "dropout after each activation (training only)"),
    "hardsub.lag_m": (_lag, "auto", "Hard Subtraction lag, or 'auto' to estimate on the training range"),
    "hardsub.max_lag": (int, "20", "largest lag considered by the estimator"),
    "alarm.window_w": (int, "50", "rolling window of the residue statistics"),
    "alarm.safety_factor": (float, "1.0", "threshold = safety_factor * calibration maximum"),
    "alarm.model": (_choice(*MODEL_NAMES), "tcn_exo", "forecaster whose residue drives the alarms"),
    "alarm.merge_gap": (int, "50", "max index gap when merging alarms into episodes"),
    "fault.kind": (_choice("none", *FAULT_KINDS), "none", "fault injected by e2e"),
    "fault.start": (int, "16500", "fault onset index"),
    "fault.duration": (int, "500", "faulted samples; 0 means until the end"),
    "fault.channel": (_choice("c", "g"), "g", "faulted channel"),
    "fault.floor": (float, "0.0", "complete_failure: constant output"),
    "fault.noise_sd_mult": (float, "3.0", "precision_degradation: total noise sd multiple"),
    "fault.slope": (float, "0.0013", "drift: offset added per sample"),
    "fault.offset": (float, "1.3", "bias: constant offset"),
    "fault.drop": (float, "2.0", "shutter_drop: size of the negative step"),
    "fault.replay_len": (int, "100", "stuck_replay: length of the repeated sequence"),
}

# fault kind -> (config key, dataclass field)
_FAULT_PARAMS = {
    "complete_failure": ("fault.floor", "floor"),
    "precision_degradation": ("fault.noise_sd_mult", "noise_sd_mult"),
    "drift": ("fault.slope", "slope"),
    "bias": ("fault.offset", "offset"),
    "shutter_drop": ("fault.drop", "drop"),
    "stuck_replay": ("fault.replay_len", "replay_len"),
}


def parse_value(key: str, text: str) -> Any:
    if key not in KEYS:
        raise InvalidConfig(f"unknown config key {key!r}")
    parser = KEYS[key][0]
    try:
        return parser(text.strip())
    except ValueError as exc:
        raise InvalidConfig(f"bad value for {key}: {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    raw: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for key, text in self.raw.items():
            parse_value(key, text)

    def __getitem__(self, key: str) -> Any:
        if key not in KEYS:
            raise KeyError(key)
        return parse_value(key, self.raw.get(key, KEYS[key][1]))

    def with_values(self, **values: Any) -> RunConfig:
        """Copy with ``values`` set; keys use ``__`` for the section dot."""
        raw = dict(self.raw)
        for name, value in values.items():
            raw[name.replace("__", ".")] = str(value)
        return RunConfig(raw)

    def with_raw(self, raw: dict[str, str]) -> RunConfig:
        return RunConfig({**self.raw, **raw})

    def sim_config(self) -> SimConfig:
        kw = {name: self[f"sim.{name}"] for name in SimConfig.field_names() if name != "seed"}
        return SimConfig(seed=self["seed"], **kw)

    def tcn_config(self) -> TcnConfig:
        kw = {f.name: self[f"tcn.{f.name}"] for f in dataclasses.fields(TcnConfig) if f.name != "seed"}
        return TcnConfig(seed=self["seed"], **kw)

    def tcn_kind(self, mode: Mode) -> Tcn:
        return Tcn(self.tcn_config(), mode)

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self["split.train"], self["split.calibrate"], self["split.test"])

    def fault_spec(self) -> FaultSpec | None:
        kind_name = self["fault.kind"]
        if kind_name == "none":
            return None
        key, attr = _FAULT_PARAMS[kind_name]
        kind = FAULT_KINDS[kind_name](**{attr: self[key]})
        duration = self["fault.duration"]
        return FaultSpec(
            kind=kind,
            start=self["fault.start"],
            duration=None if duration == 0 else duration,
            channel=self["fault.channel"],
            seed=self["seed"],
        )


def parse_config(text: str) -> RunConfig:
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise InvalidConfig(f"line {lineno}: expected 'key = value'")
        if key not in KEYS:
            raise InvalidConfig(f"line {lineno}: unknown config key {key!r}")
        if key in raw:
            raise InvalidConfig(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value.strip()
    return RunConfig(raw)


def ref_config_text() -> str:
    return resources.files("flowfault").joinpath("data", REF_CONFIG).read_text(encoding="utf-8")


def load_config(path: str | Path | None) -> RunConfig:
    """Read a config file; ``None`` or ``"ref"`` selects the bundled reference config."""
    if path is None or str(path) == "ref":
        return parse_config(ref_config_text())
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)
