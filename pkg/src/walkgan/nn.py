"""Minimal neural substrate on float64 numpy arrays.

Blocks (dense, embedding lookup, LSTM cell, strided transposed-conv
stack) carry explicit parameters and hand-derived backward passes; there
is no autodiff graph.  Every forward returns a cache consumed by the
matching backward, and backwards accumulate into ``Param.grad`` so a
sequence model can replay its tape in reverse.  ``grad_check`` compares
analytic gradients against central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

__all__ = [
    "Param",
    "Dense",
    "Embedding",
    "LSTMCell",
    "ConvTranspose2d",
    "DeconvStack",
    "Adam",
    "grad_check",
    "sigmoid",
    "softplus",
    "softmax",
    "leaky_relu",
    "l2_penalty",
]

LEAKY_SLOPE = 0.2


@dataclass(eq=False)
class Param:
    """A learnable tensor and its accumulated gradient."""

    value: np.ndarray
    grad: np.ndarray

    @classmethod
    def of(cls, value: np.ndarray) -> "Param":
        value = np.asarray(value, dtype=np.float64)
        return cls(value=value, grad=np.zeros_like(value))

    def zero_grad(self):
        self.grad.fill(0.0)


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def softplus(x):
    return np.logaddexp(0.0, x)


def softmax(x):
    z = x - np.max(x)
    e = np.exp(z)
    return e / e.sum()


def leaky_relu(x, slope: float = LEAKY_SLOPE):
    return np.where(x >= 0, x, slope * x)


def _xavier(rng: np.random.Generator, n_out: int, n_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (n_in + n_out))
    return rng.uniform(-limit, limit, size=(n_out, n_in))


def _orthogonal(rng: np.random.Generator, n: int) -> np.ndarray:
    a = rng.normal(size=(n, n))
    q, r = np.linalg.qr(a)
    return q * np.sign(np.diag(r))


class Dense:
    """Affine map y = W x + b on 1-D vectors."""

    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        self.n_in, self.n_out = n_in, n_out
        self.W = Param.of(_xavier(rng, n_out, n_in))
        self.b = Param.of(np.zeros(n_out))
        self.params = {"W": self.W, "b": self.b}

    def forward(self, x: np.ndarray):
        x = np.asarray(x, dtype=np.float64)
        return self.W.value @ x + self.b.value, x

    def backward(self, cache, dy: np.ndarray) -> np.ndarray:
        x = cache
        self.W.grad += np.outer(dy, x)
        self.b.grad += dy
        return self.W.value.T @ dy


class Embedding:
    """Lookup table applied as table.T @ v.

    The input is a distribution or one-hot vector over the rows, so hard
    picks, soft relaxed samples and interpolates share one code path.
    """

    def __init__(self, n_rows: int, dim: int, rng: np.random.Generator):
        self.n_rows, self.dim = n_rows, dim
        self.table = Param.of(rng.normal(scale=0.1, size=(n_rows, dim)))
        self.params = {"table": self.table}

    def forward(self, v: np.ndarray):
        v = np.asarray(v, dtype=np.float64)
        return self.table.value.T @ v, v

    def backward(self, cache, dy: np.ndarray) -> np.ndarray:
        v = cache
        self.table.grad += np.outer(v, dy)
        return self.table.value @ dy


class LSTMCell:
    """Single LSTM cell with concatenated gates in (i, f, g, o) order.

    Input weights use Xavier init, recurrent weights are orthogonal, and
    the forget-gate bias starts at 1 so early memory is retained.
    """

    def __init__(self, n_in: int, n_hidden: int, rng: np.random.Generator):
        self.n_in, self.n_hidden = n_in, n_hidden
        w_x = np.concatenate([_xavier(rng, n_hidden, n_in) for _ in range(4)], axis=0)
        w_h = np.concatenate([_orthogonal(rng, n_hidden) for _ in range(4)], axis=0)
        self.W = Param.of(np.concatenate([w_x, w_h], axis=1))
        b = np.zeros(4 * n_hidden)
        b[n_hidden : 2 * n_hidden] = 1.0
        self.b = Param.of(b)
        self.params = {"W": self.W, "b": self.b}

    def init_state(self) -> tuple[np.ndarray, np.ndarray]:
        return np.zeros(self.n_hidden), np.zeros(self.n_hidden)

    def forward(self, x: np.ndarray, h_prev: np.ndarray, c_prev: np.ndarray):
        H = self.n_hidden
        xh = np.concatenate([np.asarray(x, dtype=np.float64), h_prev])
        z = self.W.value @ xh + self.b.value
        i = sigmoid(z[:H])
        f = sigmoid(z[H : 2 * H])
        g = np.tanh(z[2 * H : 3 * H])
        o = sigmoid(z[3 * H :])
        c = f * c_prev + i * g
        tc = np.tanh(c)
        h = o * tc
        cache = (xh, c_prev, i, f, g, o, tc)
        return h, c, cache

    def backward(self, cache, dh: np.ndarray, dc: np.ndarray):
        xh, c_prev, i, f, g, o, tc = cache
        do = dh * tc
        dct = dc + dh * o * (1.0 - tc * tc)
        di = dct * g
        df = dct * c_prev
        dg = dct * i
        dc_prev = dct * f
        dz = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), dg * (1 - g * g), do * o * (1 - o)]
        )
        self.W.grad += np.outer(dz, xh)
        self.b.grad += dz
        dxh = self.W.value.T @ dz
        return dxh[: self.n_in], dxh[self.n_in :], dc_prev


class ConvTranspose2d:
    """Transposed convolution with kernel size equal to stride.

    Each input pixel expands into a learned k-by-k block, so output
    spatial dims are exactly k times the input's.  That keeps the
    adjoint exact and loop-free via einsum.
    """

    def __init__(self, c_in: int, c_out: int, k: int, rng: np.random.Generator):
        self.c_in, self.c_out, self.k = c_in, c_out, k
        scale = np.sqrt(2.0 / (c_in * k * k))
        self.K = Param.of(rng.normal(scale=scale, size=(c_in, c_out, k, k)))
        self.b = Param.of(np.zeros(c_out))
        self.params = {"K": self.K, "b": self.b}

    def forward(self, x: np.ndarray):
        c, h, w = x.shape
        k = self.k
        y5 = np.einsum("cij,cokl->oikjl", x, self.K.value)
        y = y5.reshape(self.c_out, h * k, w * k) + self.b.value[:, None, None]
        return y, x

    def backward(self, cache, dy: np.ndarray) -> np.ndarray:
        x = cache
        c, h, w = x.shape
        k = self.k
        dy5 = dy.reshape(self.c_out, h, k, w, k)
        self.K.grad += np.einsum("cij,oikjl->cokl", x, dy5)
        self.b.grad += dy.sum(axis=(1, 2))
        return np.einsum("oikjl,cokl->cij", dy5, self.K.value)


class DeconvStack:
    """Dense seed + leaky-ReLU transposed convolutions up to a D1 x D2 grid.

    The default two stride-2 layers lift an input vector to a 32 x 16
    matrix used by the deep time sampler.
    """

    def __init__(
        self,
        n_in: int,
        rng: np.random.Generator,
        channels: tuple[int, ...] = (16, 8, 1),
        seed_hw: tuple[int, int] = (8, 4),
        k: int = 2,
    ):
        self.channels = channels
        self.seed_hw = seed_hw
        self.seed = Dense(n_in, channels[0] * seed_hw[0] * seed_hw[1], rng)
        self.layers = [
            ConvTranspose2d(channels[i], channels[i + 1], k, rng)
            for i in range(len(channels) - 1)
        ]
        self.out_hw = (seed_hw[0] * k ** len(self.layers), seed_hw[1] * k ** len(self.layers))
        self.params = {f"seed.{n}": p for n, p in self.seed.params.items()}
        for li, layer in enumerate(self.layers):
            for n, p in layer.params.items():
                self.params[f"conv{li}.{n}"] = p

    def forward(self, x: np.ndarray):
        s, seed_cache = self.seed.forward(x)
        cur = s.reshape(self.channels[0], *self.seed_hw)
        caches = []
        for layer in self.layers:
            pre, conv_cache = layer.forward(cur)
            cur = leaky_relu(pre)
            caches.append((conv_cache, pre))
        out = cur[0] if self.channels[-1] == 1 else cur
        return out, (seed_cache, caches, cur.shape)

    def backward(self, cache, dout: np.ndarray) -> np.ndarray:
        seed_cache, caches, out_shape = cache
        dcur = dout.reshape(out_shape)
        for layer, (conv_cache, pre) in zip(reversed(self.layers), reversed(caches)):
            dpre = dcur * np.where(pre >= 0, 1.0, LEAKY_SLOPE)
            dcur = layer.backward(conv_cache, dpre)
        ds = dcur.reshape(-1)
        return self.seed.backward(seed_cache, ds)

    def min_kink_distance(self, cache) -> float:
        """Smallest |pre-activation|; gradient checks avoid near-kink points."""
        _, caches, _ = cache
        return min(float(np.min(np.abs(pre))) for _, pre in caches)


class Adam:
    """Adam with bias correction over a named parameter dict."""

    def __init__(
        self,
        params: dict[str, Param],
        lr: float = 3e-3,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(p.value) for k, p in params.items()}
        self.v = {k: np.zeros_like(p.value) for k, p in params.items()}
        self.t = 0

    def step(self):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for k, p in self.params.items():
            g = p.grad
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            m_hat = self.m[k] / (1 - b1**self.t)
            v_hat = self.v[k] / (1 - b2**self.t)
            p.value -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)

    def zero_grad(self):
        for p in self.params.values():
            p.zero_grad()


def l2_penalty(params: dict[str, Param], coef: float) -> float:
    """Add coef * ||theta||^2 to the loss; gradients accumulate in place."""
    if coef == 0.0:
        return 0.0
    total = 0.0
    for p in params.values():
        total += float(np.sum(p.value * p.value))
        p.grad += 2.0 * coef * p.value
    return coef * total


def grad_check(
    loss_and_grads: Callable[[dict[str, np.ndarray]], tuple[float, dict[str, np.ndarray]]],
    arrays: dict[str, np.ndarray],
    step: float = 1e-5,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    ``loss_and_grads`` maps the named arrays to a scalar loss and
    matching analytic gradients; every entry of every array is perturbed
    by ``step`` both ways.  Relative error uses max(|a|, |n|, 1) as the
    denominator so near-zero gradients compare absolutely.
    """
    _, analytic = loss_and_grads(arrays)
    worst = 0.0
    for name, arr in arrays.items():
        flat = arr.reshape(-1)
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + step
            up, _ = loss_and_grads(arrays)
            flat[idx] = orig - step
            down, _ = loss_and_grads(arrays)
            flat[idx] = orig
            numeric = (up - down) / (2.0 * step)
            a = float(analytic[name].reshape(-1)[idx])
            denom = max(abs(a), abs(numeric), 1.0)
            worst = max(worst, abs(a - numeric) / denom)
    return worst
