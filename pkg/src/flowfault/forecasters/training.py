"""Mini-batch Adam training of the TCN forecaster."""

from __future__ import annotations

import logging
import math

import numpy as np

from ..core import SeriesPair
from ..errors import ModelKindMismatch, NonFiniteLoss
from .model import Normalization, Tcn, TrainedModel, training_windows
from .tcn import TcnNetwork, init_parameters

log = logging.getLogger(__name__)

_STREAM_TAG = 0x7C4


class Adam:
    def __init__(self, size: int, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.step = 0

    def update(self, params: np.ndarray, grad: np.ndarray) -> None:
        self.step += 1
        self.m *= self.beta1
        self.m += (1 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.step)
        v_hat = self.v / (1 - self.beta2**self.step)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def _stats(values: np.ndarray) -> tuple[float, float]:
    sd = float(np.std(values))
    # a constant channel carries no scale information; leave it unscaled
    return float(np.mean(values)), sd if sd > 0 else 1.0


def seed_streams(seed: int) -> tuple[np.random.Generator, ...]:
    """Independent generators for initialization, shuffling and dropout."""
    root = np.random.SeedSequence(seed, spawn_key=(_STREAM_TAG,))
    return tuple(np.random.Generator(np.random.PCG64(s)) for s in root.spawn(3))


def tcn_train(pair: SeriesPair, kind: Tcn) -> TrainedModel:
    """Fit a TCN to minimize the one-step-ahead squared error on ``pair``.

    Loss values in the history are in normalized (z-score) units.
    """
    if not isinstance(kind, Tcn):
        raise ModelKindMismatch(f"tcn_train needs a Tcn kind, got {type(kind).__name__}")
    config = kind.config
    config.validate()
    x_raw, y_raw = training_windows(pair, config.input_window_n, kind.input_channel)
    in_mean, in_sd = _stats(pair.channel(kind.input_channel))
    out_mean, out_sd = _stats(pair.g)
    norm = Normalization(in_mean, in_sd, out_mean, out_sd)
    x = (x_raw - in_mean) / in_sd
    y = (y_raw - out_mean) / out_sd

    init_rng, shuffle_rng, dropout_rng = seed_streams(config.seed)
    params = init_parameters(config, init_rng)
    net = TcnNetwork(config, params)
    opt = Adam(params.size, config.learning_rate)
    use_dropout = dropout_rng if config.dropout_rate > 0 else None

    count = x.shape[0]
    history = []
    for epoch in range(config.epochs):
        order = shuffle_rng.permutation(count)
        total = 0.0
        for a in range(0, count, config.batch_size):
            idx = order[a : a + config.batch_size]
            with np.errstate(over="ignore", invalid="ignore"):  # divergence is reported below
                loss, grad = net.loss_and_grad(x[idx], y[idx], use_dropout)
            if not (math.isfinite(loss) and np.isfinite(grad).all()):
                raise NonFiniteLoss(
                    f"loss diverged at epoch {epoch + 1}, batch {a // config.batch_size + 1} "
                    f"(loss={loss}); try a smaller learning_rate"
                )
            total += loss * idx.size
            opt.update(params, grad)
        history.append(total / count)
        log.debug("%s epoch %d/%d loss %.6g", kind.mode.value, epoch + 1, config.epochs, history[-1])
    return TrainedModel(kind, params, norm, tuple(history))
