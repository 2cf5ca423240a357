"""Temporal Convolutional Network with hand-written reverse-mode gradients.

Architecture: ``num_blocks`` residual blocks of dilated causal 1-d
convolutions (dilation 1, 2, 4, ...), each block being::

    h1  = relu(causal_conv(x,  dilation))      # dropout after the activation
    h2  = relu(causal_conv(h1, dilation))      # dropout after the activation
    out = h2 + skip(x)                         # skip: width-1 conv if channels differ

followed by a linear head reading the last time position. The network works
on z-scored values; normalization lives in :mod:`flowfault.forecasters.model`.

Flat parameter layout (row-major, in this order, per block ``b`` = 0..):

    block{b}.conv1.weight   (channels, in_channels, kernel_size)
    block{b}.conv1.bias     (channels,)
    block{b}.conv2.weight   (channels, channels, kernel_size)
    block{b}.conv2.bias     (channels,)
    block{b}.skip.weight    (channels, in_channels)   only if in_channels != channels
    block{b}.skip.bias      (channels,)               only if in_channels != channels
    head.weight             (channels,)
    head.bias               ()

``in_channels`` is 1 for the first block and ``channels`` afterwards. Kernel
tap ``kernel_size - 1`` multiplies the current sample, tap ``j`` the sample
``(kernel_size - 1 - j) * dilation`` steps back.

Weights use fan-in scaled normal initialization, sd ``sqrt(2 / fan_in)``
for the ReLU convolutions and ``sqrt(1 / fan_in)`` for the skip and head
layers; all biases start at zero.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidConfig

IN_CHANNELS = 1


@dataclass(frozen=True)
class TcnConfig:
    input_window_n: int = 32
    channels: int = 16
    kernel_size: int = 2
    num_blocks: int = 4
    learning_rate: float = 1e-3
    epochs: int = 50
    batch_size: int = 32
    seed: int = 0
    dropout_rate: float = 0.0

    @property
    def receptive_field(self) -> int:
        return 1 + 2 * (self.kernel_size - 1) * (2**self.num_blocks - 1)

    def validate(self) -> None:
        checks = [
            (self.input_window_n >= 1, "input_window_n must be >= 1"),
            (self.channels >= 1, "channels must be >= 1"),
            (self.kernel_size >= 2, "kernel_size must be >= 2"),
            (self.num_blocks >= 1, "num_blocks must be >= 1"),
            (self.learning_rate > 0, "learning_rate must be > 0"),
            (self.epochs >= 1, "epochs must be >= 1"),
            (self.batch_size >= 1, "batch_size must be >= 1"),
            (0 <= self.dropout_rate < 1, "dropout_rate must lie in [0, 1)"),
            (0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer"),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidConfig(message)
        if self.input_window_n + 1 < self.receptive_field:
            warnings.warn(
                f"input window ({self.input_window_n + 1} samples) is shorter than the "
                f"receptive field ({self.receptive_field}); early taps see zero padding",
                stacklevel=2,
            )


def parameter_layout(config: TcnConfig) -> list[tuple[str, tuple[int, ...]]]:
    ch, k = config.channels, config.kernel_size
    layout = []
    for b in range(config.num_blocks):
        cin = IN_CHANNELS if b == 0 else ch
        layout += [
            (f"block{b}.conv1.weight", (ch, cin, k)),
            (f"block{b}.conv1.bias", (ch,)),
            (f"block{b}.conv2.weight", (ch, ch, k)),
            (f"block{b}.conv2.bias", (ch,)),
        ]
        if cin != ch:
            layout += [(f"block{b}.skip.weight", (ch, cin)), (f"block{b}.skip.bias", (ch,))]
    layout += [("head.weight", (ch,)), ("head.bias", ())]
    return layout


def parameter_count(config: TcnConfig) -> int:
    return sum(math.prod(shape) for _, shape in parameter_layout(config))


def _unflatten(flat: np.ndarray, layout) -> dict[str, np.ndarray]:
    views, offset = {}, 0
    for name, shape in layout:
        size = math.prod(shape)
        views[name] = flat[offset : offset + size].reshape(shape)
        offset += size
    return views


def init_parameters(config: TcnConfig, rng: np.random.Generator) -> np.ndarray:
    layout = parameter_layout(config)
    flat = np.zeros(parameter_count(config))
    views = _unflatten(flat, layout)
    for name, shape in layout:
        if name.endswith("bias"):
            continue
        if ".conv" in name:
            sd = math.sqrt(2.0 / (shape[1] * shape[2]))
        elif name.startswith("head"):
            sd = math.sqrt(1.0 / shape[0])
        else:
            sd = math.sqrt(1.0 / shape[1])
        views[name][...] = sd * rng.standard_normal(shape)
    return flat


# --- primitives ------------------------------------------------------------
# Activations are channels-last, (batch, time, channels). Each convolution
# gathers its shifted taps into one (batch * time, in * kernel) matrix so a
# single GEMM does the work.

def _conv_forward(x, w, b, dilation):
    """Causal dilated conv. x: (B, T, I), w: (O, I, K) -> (B, T, O)."""
    bsz, t, cin = x.shape
    k = w.shape[2]
    pad = (k - 1) * dilation
    xp = np.pad(x, ((0, 0), (pad, 0), (0, 0))) if pad else x
    cols = np.concatenate([xp[:, j * dilation : j * dilation + t, :] for j in range(k)], axis=2)
    cols = cols.reshape(bsz * t, k * cin)
    # (O, I, K) -> (K * I, O), matching the tap-major column order
    wmat = w.transpose(2, 1, 0).reshape(k * cin, -1)
    y = cols @ wmat
    y += b
    return y.reshape(bsz, t, -1), cols


def _conv_backward(dy, cols, w, dilation):
    bsz, t, cout = dy.shape
    cin, k = w.shape[1], w.shape[2]
    pad = (k - 1) * dilation
    dy2 = dy.reshape(bsz * t, cout)
    dwmat = cols.T @ dy2
    dw = dwmat.reshape(k, cin, cout).transpose(2, 1, 0)
    wmat = w.transpose(2, 1, 0).reshape(k * cin, cout)
    dcols = (dy2 @ wmat.T).reshape(bsz, t, k, cin)
    dxp = np.zeros((bsz, t + pad, cin))
    for j in range(k):
        dxp[:, j * dilation : j * dilation + t, :] += dcols[:, :, j, :]
    return dxp[:, pad:, :], dw, dy2.sum(axis=0)


def _dropout_mask(shape, rate, rng):
    if rate == 0.0 or rng is None:
        return None
    return (rng.random(shape) >= rate) / (1.0 - rate)


class TcnNetwork:
    """Forward and backward passes over a flat parameter vector.

    ``params`` is used in place (not copied), so an optimizer updating the
    flat vector updates the network.
    """

    def __init__(self, config: TcnConfig, params: np.ndarray):
        self.config = config
        self.layout = parameter_layout(config)
        expected = parameter_count(config)
        if params.shape != (expected,):
            raise ValueError(f"expected {expected} parameters, got shape {params.shape}")
        self.params = params
        self.p = _unflatten(params, self.layout)

    def forward(self, x: np.ndarray, rng: np.random.Generator | None = None):
        """Map normalized windows ``x`` of shape (B, T) to outputs (B,).

        Dropout is applied only when ``rng`` is given (training).
        Returns ``(y, cache)``; the cache feeds :meth:`backward`.
        """
        p, rate = self.p, self.config.dropout_rate
        h = x[:, :, None]
        cache = []
        for b in range(self.config.num_blocks):
            d = 2**b
            a1, cols1 = _conv_forward(h, p[f"block{b}.conv1.weight"], p[f"block{b}.conv1.bias"], d)
            m1 = _dropout_mask(a1.shape, rate, rng)
            h1 = np.maximum(a1, 0.0)
            if m1 is not None:
                h1 = h1 * m1
            a2, cols2 = _conv_forward(h1, p[f"block{b}.conv2.weight"], p[f"block{b}.conv2.bias"], d)
            m2 = _dropout_mask(a2.shape, rate, rng)
            h2 = np.maximum(a2, 0.0)
            if m2 is not None:
                h2 = h2 * m2
            if f"block{b}.skip.weight" in p:
                res = h @ p[f"block{b}.skip.weight"].T + p[f"block{b}.skip.bias"]
            else:
                res = h
            cache.append((h, a1, m1, cols1, a2, m2, cols2))
            h = h2 + res
        last = h[:, -1, :]
        y = last @ p["head.weight"] + p["head.bias"]
        return y, (cache, h)

    def backward(self, cache, dy: np.ndarray) -> np.ndarray:
        """Gradient of ``sum(dy * y)`` with respect to the flat parameters."""
        p = self.p
        blocks, h_out = cache
        grad = np.zeros_like(self.params)
        g = _unflatten(grad, self.layout)

        g["head.weight"][...] = dy @ h_out[:, -1, :]
        g["head.bias"][...] = dy.sum()
        dh = np.zeros_like(h_out)
        dh[:, -1, :] = dy[:, None] * p["head.weight"][None, :]

        for b in reversed(range(self.config.num_blocks)):
            d = 2**b
            h_in, a1, m1, cols1, a2, m2, cols2 = blocks[b]
            if f"block{b}.skip.weight" in p:
                ws = p[f"block{b}.skip.weight"]
                g[f"block{b}.skip.weight"][...] = np.tensordot(dh, h_in, axes=([0, 1], [0, 1]))
                g[f"block{b}.skip.bias"][...] = dh.sum(axis=(0, 1))
                dh_in = dh @ ws
            else:
                dh_in = dh.copy()
            da2 = dh if m2 is None else dh * m2
            da2 = da2 * (a2 > 0)
            dh1, dw2, db2 = _conv_backward(da2, cols2, p[f"block{b}.conv2.weight"], d)
            g[f"block{b}.conv2.weight"][...] = dw2
            g[f"block{b}.conv2.bias"][...] = db2
            da1 = dh1 if m1 is None else dh1 * m1
            da1 = da1 * (a1 > 0)
            dx, dw1, db1 = _conv_backward(da1, cols1, p[f"block{b}.conv1.weight"], d)
            g[f"block{b}.conv1.weight"][...] = dw1
            g[f"block{b}.conv1.bias"][...] = db1
            dh = dh_in + dx
        return grad

    def loss_and_grad(self, x, y, rng=None) -> tuple[float, np.ndarray]:
        """Mean squared error over the batch and its parameter gradient."""
        pred, cache = self.forward(x, rng)
        err = pred - y
        loss = float(np.mean(err * err))
        grad = self.backward(cache, 2.0 * err / err.size)
        return loss, grad
