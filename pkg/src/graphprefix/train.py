"""Fine-tuning loop: masked response loss, warmup schedule, deterministic
epoch ordering.

Batch order for epoch e is a pure function of (seed, e), so a run resumed
from a step checkpoint retraces the exact remaining batches and reproduces
the uninterrupted loss curve bitwise.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import tensor as T
from .config import TrainConfig
from .optim import AdamW, warmup_lr
from .tensor import check_unique_names


def epoch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(7001, epoch)))
    return rng.permutation(n)


def steps_per_epoch(n_instances: int, batch_size: int) -> int:
    return math.ceil(n_instances / batch_size)


def train_model(model, dataset, cfg: TrainConfig, *, opt: AdamW | None = None,
                start_step: int = 0, max_steps: int | None = None,
                log_every: int = 0) -> tuple[AdamW, list[float]]:
    """Run (or continue) fine-tuning; returns the optimizer and the per-step
    batch losses.  Only the model's trainable parameters move."""
    params = model.trainable_parameters()
    check_unique_names(params)
    if opt is None:
        opt = AdamW(params, lr=cfg.lr, weight_decay=cfg.weight_decay)
    spe = steps_per_epoch(len(dataset), cfg.batch_size)
    total = cfg.epochs * spe if max_steps is None else max_steps
    warmup = cfg.warmup_epochs * spe
    losses: list[float] = []
    t0 = time.time()
    batched = getattr(model, "batch_loss", None)
    for step in range(start_step, total):
        epoch, pos = divmod(step, spe)
        order = epoch_order(cfg.seed, epoch, len(dataset))
        batch = order[pos * cfg.batch_size:(pos + 1) * cfg.batch_size]
        opt.zero_grad()
        if batched is not None:
            loss = batched([dataset[int(i)] for i in batch])
            T.backward(loss)
            batch_loss = loss.item()
        else:
            batch_loss = 0.0
            for idx in batch:
                loss = model.loss(dataset[int(idx)]) * (1.0 / len(batch))
                T.backward(loss)
                batch_loss += loss.item()
        opt.step(lr=warmup_lr(cfg.lr, step, warmup))
        losses.append(batch_loss)
        if log_every and (step + 1) % log_every == 0:
            recent = float(np.mean(losses[-log_every:]))
            print(f"step {step + 1}/{total}: loss {recent:.4f} "
                  f"({(time.time() - t0) / (step - start_step + 1):.2f} s/step)")
    return opt, losses
