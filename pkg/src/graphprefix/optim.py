"""Adam with decoupled weight decay, plus the warmup schedule."""

from __future__ import annotations

import numpy as np

from .tensor import Parameter


class AdamW:
    def __init__(self, params: list[Parameter], lr: float, betas=(0.9, 0.999),
                 eps: float = 1e-8, weight_decay: float = 0.0):
        self.params = [p for p in params if p.trainable]
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self, lr: float | None = None) -> None:
        lr = self.lr if lr is None else lr
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        bc1 = 1.0 - b1 ** self.t
        bc2 = 1.0 - b2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            g = p.grad
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * p.data
            p.tensor.data -= lr * update

    def state_dict(self) -> dict:
        return {
            "t": self.t,
            "m": {p.name: m.copy() for p, m in zip(self.params, self.m)},
            "v": {p.name: v.copy() for p, v in zip(self.params, self.v)},
        }

    def load_state_dict(self, state: dict) -> None:
        self.t = int(state["t"])
        for i, p in enumerate(self.params):
            self.m[i] = np.array(state["m"][p.name], dtype=np.float64)
            self.v[i] = np.array(state["v"][p.name], dtype=np.float64)


def warmup_lr(base_lr: float, step: int, warmup_steps: int) -> float:
    """Linear ramp over the warmup window, constant afterwards."""
    if warmup_steps <= 0 or step >= warmup_steps:
        return base_lr
    return base_lr * (step + 1) / warmup_steps
