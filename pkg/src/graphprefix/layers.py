"""Shared neural building blocks: linear maps, layer norm, attention, FFN.

Each block registers its weights into a caller-supplied parameter list so
models can enumerate, freeze, and checkpoint everything by name.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .tensor import Parameter, Tensor


class Linear:
    def __init__(self, name: str, d_in: int, d_out: int, rng: np.random.Generator,
                 params: list[Parameter], bias: bool = True):
        self.w = Parameter(f"{name}.w", T.fan_in_init(rng, d_in, (d_in, d_out)))
        params.append(self.w)
        self.b = None
        if bias:
            self.b = Parameter(f"{name}.b", np.zeros(d_out))
            params.append(self.b)

    def __call__(self, x: Tensor) -> Tensor:
        return T.linear(x, self.w.tensor, self.b.tensor if self.b else None)


class LayerNorm:
    def __init__(self, name: str, d: int, params: list[Parameter]):
        self.gain = Parameter(f"{name}.gain", np.ones(d))
        self.bias = Parameter(f"{name}.bias", np.zeros(d))
        params.extend([self.gain, self.bias])

    def __call__(self, x: Tensor) -> Tensor:
        return T.layer_norm(x, self.gain.tensor, self.bias.tensor)


class FeedForward:
    """Two bias-free linear maps around a ReLU."""

    def __init__(self, name: str, d: int, d_hidden: int, rng, params):
        self.up = Linear(f"{name}.up", d, d_hidden, rng, params, bias=False)
        self.down = Linear(f"{name}.down", d_hidden, d, rng, params, bias=False)

    def __call__(self, x: Tensor) -> Tensor:
        return self.down(T.relu(self.up(x)))


def split_heads(x: Tensor, n_heads: int) -> Tensor:
    """(t, d) -> (heads, t, d/heads); (b, t, d) -> (b, heads, t, d/heads)"""
    if x.ndim == 2:
        t, d = x.shape
        return T.transpose(T.reshape(x, (t, n_heads, d // n_heads)), (1, 0, 2))
    b, t, d = x.shape
    return T.transpose(T.reshape(x, (b, t, n_heads, d // n_heads)), (0, 2, 1, 3))


def merge_heads(x: Tensor) -> Tensor:
    """Inverse of split_heads."""
    if x.ndim == 3:
        h, t, dh = x.shape
        return T.reshape(T.transpose(x, (1, 0, 2)), (t, h * dh))
    b, h, t, dh = x.shape
    return T.reshape(T.transpose(x, (0, 2, 1, 3)), (b, t, h * dh))


class MultiHeadAttention:
    """Scaled dot-product attention over 2-D (sequence, width) inputs.

    ``extra_kv`` rows, when given, are prepended to the projected keys and
    values unchanged: they act as always-visible attention slots.
    """

    def __init__(self, name: str, d: int, n_heads: int, rng, params):
        if d % n_heads:
            raise ValueError(f"{name}: width {d} not divisible by {n_heads} heads")
        self.n_heads = n_heads
        self.d_head = d // n_heads
        self.wq = Linear(f"{name}.q", d, d, rng, params, bias=False)
        self.wk = Linear(f"{name}.k", d, d, rng, params, bias=False)
        self.wv = Linear(f"{name}.v", d, d, rng, params, bias=False)
        self.wo = Linear(f"{name}.out", d, d, rng, params, bias=False)

    def __call__(self, q_in: Tensor, kv_in: Tensor, mask: np.ndarray | None = None,
                 extra_kv: Tensor | None = None, return_weights: bool = False):
        q = split_heads(self.wq(q_in), self.n_heads)
        k = split_heads(self.wk(kv_in), self.n_heads)
        v = split_heads(self.wv(kv_in), self.n_heads)
        if extra_kv is not None:
            p = split_heads(extra_kv, self.n_heads)
            axis = k.ndim - 2
            k = T.concat([p, k], axis=axis)
            v = T.concat([p, v], axis=axis)
        swap = tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2)
        scores = T.matmul(q, T.transpose(k, swap)) * (1.0 / np.sqrt(self.d_head))
        if mask is not None:
            full = np.broadcast_to(mask, scores.shape)
            scores = scores + Tensor(full)
        att = T.softmax(scores, axis=-1)
        out = self.wo(merge_heads(T.matmul(att, v)))
        if return_weights:
            return out, att
        return out


NEG_INF = -1e30


def causal_mask(t: int, n_prefix: int = 0) -> np.ndarray:
    """(t, n_prefix + t) additive mask: prefix slots always visible, real
    positions visible causally."""
    m = np.zeros((t, n_prefix + t), dtype=np.float64)
    future = np.triu(np.ones((t, t), dtype=bool), k=1)
    m[:, n_prefix:][future] = NEG_INF
    return m
