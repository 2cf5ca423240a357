from __future__ import annotations

from flowfault.simulator import SimConfig

# Short series and a tiny TCN: every pipeline stage runs in about a second.
SMALL_CFG_TEXT = """\
seed = 7
sim.length = 1200
split.train = 0:600
split.calibrate = 600:900
split.test = 900:1200
tcn.input_window_n = 8
tcn.channels = 4
tcn.num_blocks = 2
tcn.epochs = 2
tcn.batch_size = 32
alarm.window_w = 20
fault.kind = bias
fault.start = 1000
fault.duration = 100
"""


def noiseless_sim(lag_m: int = 3, length: int = 2000, seed: int = 0, **kw) -> SimConfig:
    return SimConfig(
        length=length,
        lag_m=lag_m,
        obs_noise_sd_c=0.0,
        obs_noise_sd_g=0.0,
        seed=seed,
        **kw,
    )
