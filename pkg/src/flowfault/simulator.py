"""Deterministic generator of correlated C/G signal pairs.

The latent flow signal ``s`` is ``latent_level`` plus an AR(1) process whose
innovations carry sparse positive bursts (slug-like excursions that decay
with the AR coefficient). The leading sensor sees it directly, the target sensor sees it
``lag_m`` samples later through an affine map::

    C(t) = s(t) + noise_c(t)
    G(t) = gain * s(t - lag_m) + offset + noise_g(t)

Observation noise is gaussian; on G it may be autocorrelated (AR(1) with
coefficient ``obs_noise_ar_g`` and marginal sd ``obs_noise_sd_g``), which
models slow instrument wander that the upstream sensor cannot explain.

Random numbers come from numpy's PCG64 bit generator, seeded through a
``SeedSequence`` and split into independent substreams (latent innovations,
C noise, G noise, bursts), so a fixed seed fixes the output.

Amplitude defaults are arbitrary: real MPFM signal scales are not available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .core import SeriesPair
from .errors import InvalidConfig

# Samples simulated and discarded before the warm-up extension so the latent
# process starts near stationarity.
BURN_IN = 200

# Distinguishes the simulator's seed stream from other consumers of a seed.
_STREAM_TAG = 0x5157


@dataclass(frozen=True)
class SimConfig:
    length: int = 20_000
    lag_m: int = 3
    ar_coeff: float = 0.6
    latent_level: float = 2.0
    latent_noise_sd: float = 0.5
    gain: float = 1.0
    offset: float = 0.0
    obs_noise_sd_c: float = 0.3
    obs_noise_sd_g: float = 0.3
    # AR(1) coefficient of the G observation noise; 0 gives white noise
    obs_noise_ar_g: float = 0.95
    burst_amplitude: float = 2.0
    burst_rate: float = 0.01
    seed: int = 0

    def validate(self) -> None:
        if self.lag_m < 0:
            raise InvalidConfig("lag_m must be >= 0")
        if self.length <= self.lag_m + 10:
            raise InvalidConfig(f"length must exceed lag_m + 10 (got {self.length}, lag_m={self.lag_m})")
        if not abs(self.ar_coeff) < 1:
            raise InvalidConfig("ar_coeff must lie in (-1, 1)")
        if not abs(self.obs_noise_ar_g) < 1:
            raise InvalidConfig("obs_noise_ar_g must lie in (-1, 1)")
        for name in ("latent_noise_sd", "obs_noise_sd_c", "obs_noise_sd_g", "burst_amplitude"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise InvalidConfig(f"{name} must be finite and >= 0")
        if not 0 <= self.burst_rate <= 1:
            raise InvalidConfig("burst_rate must lie in [0, 1]")
        if not all(math.isfinite(v) for v in (self.gain, self.offset, self.latent_level)):
            raise InvalidConfig("gain, offset and latent_level must be finite")
        if not 0 <= self.seed < 2**64:
            raise InvalidConfig("seed must be an unsigned 64-bit integer")

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


def _substreams(seed: int, n: int) -> list[np.random.Generator]:
    root = np.random.SeedSequence(seed, spawn_key=(_STREAM_TAG,))
    return [np.random.Generator(np.random.PCG64(s)) for s in root.spawn(n)]


def _ar1(innovations: np.ndarray, coeff: float) -> np.ndarray:
    # sequential recurrence in plain floats: exact and platform independent
    out = np.empty_like(innovations)
    prev = 0.0
    for i, e in enumerate(innovations.tolist()):
        prev = coeff * prev + e
        out[i] = prev
    return out


def generate(config: SimConfig) -> SeriesPair:
    config.validate()
    latent_rng, noise_c_rng, noise_g_rng, burst_rng = _substreams(config.seed, 4)
    extended = BURN_IN + config.lag_m + config.length

    innovations = config.latent_noise_sd * latent_rng.standard_normal(extended)
    bursts = burst_rng.random(extended) < config.burst_rate
    innovations = innovations + config.burst_amplitude * bursts
    s = config.latent_level + _ar1(innovations, config.ar_coeff)[BURN_IN:]
    # s[k] is the latent value at t = k - lag_m

    noise_c = config.obs_noise_sd_c * noise_c_rng.standard_normal(config.length)
    rho = config.obs_noise_ar_g
    white_g = noise_g_rng.standard_normal(config.length)
    white_g[1:] *= math.sqrt(1.0 - rho * rho)
    noise_g = config.obs_noise_sd_g * _ar1(white_g, rho)

    c = s[config.lag_m :] + noise_c
    g = config.gain * s[: config.length] + config.offset + noise_g
    return SeriesPair.from_arrays(c, g, name=f"sim-seed{config.seed}")
