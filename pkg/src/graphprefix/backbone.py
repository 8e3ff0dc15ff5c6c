"""A small decoder-only causal language model that is pretrained once on
the task corpus and then frozen.

Per-layer prefix slots can be injected into every attention: the same
(slots, width) block is prepended to that layer's projected keys AND
values, visible to every query position, while real tokens remain under
the strict causal mask.  With no prefix the model is a plain causal LM.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .layers import FeedForward, LayerNorm, MultiHeadAttention, causal_mask
from .optim import AdamW, warmup_lr
from .tensor import Parameter, Tensor
from .tokenizer import Tokenizer


class BackboneLM:
    def __init__(self, *, vocab_size: int, d_model: int, n_layers: int,
                 n_heads: int, block_size: int, rng: np.random.Generator):
        self.vocab_size = vocab_size
        self.d_model = d_model
        self.n_layers = n_layers
        self.block_size = block_size
        self.frozen = False
        self.params: list[Parameter] = []
        p = self.params

        self.embed = Parameter("backbone.embed", T.normal_init(rng, (vocab_size, d_model), 0.02))
        self.pos = Parameter("backbone.pos", T.normal_init(rng, (block_size, d_model), 0.02))
        p.extend([self.embed, self.pos])
        self.layers = []
        for i in range(n_layers):
            name = f"backbone.layer{i}"
            self.layers.append({
                "ln1": LayerNorm(f"{name}.ln1", d_model, p),
                "attn": MultiHeadAttention(f"{name}.attn", d_model, n_heads, rng, p),
                "ln2": LayerNorm(f"{name}.ln2", d_model, p),
                "ffn": FeedForward(f"{name}.ffn", d_model, 4 * d_model, rng, p),
            })
        self.ln_f = LayerNorm("backbone.ln_f", d_model, p)
        self.head = Parameter("backbone.head", T.fan_in_init(rng, d_model, (d_model, vocab_size)))
        p.append(self.head)

    def freeze(self) -> None:
        for p in self.params:
            p.freeze()
        self.frozen = True

    def hidden_states(self, token_ids, prefix: Tensor | None = None) -> Tensor:
        """token_ids -> final-norm hidden states (t, d_model).  ``prefix``,
        when given, has shape (n_layers, slots, d_model); layer l consumes
        row l."""
        ids = np.asarray(token_ids, dtype=np.int64)
        if ids.size == 0:
            raise ValueError("forward: empty prompt")
        if ids.size > self.block_size:
            raise ValueError(f"sequence of {ids.size} tokens exceeds block size {self.block_size}")
        if ids.min() < 0 or ids.max() >= self.vocab_size:
            raise ValueError(f"token id out of range: {int(ids.max())}")
        n_prefix = 0
        if prefix is not None:
            if prefix.shape[0] != self.n_layers or prefix.shape[2] != self.d_model:
                raise ValueError(f"prefix shape {prefix.shape} does not match "
                                 f"({self.n_layers}, slots, {self.d_model})")
            n_prefix = prefix.shape[1]

        t = ids.size
        x = T.embedding(self.embed.tensor, ids) + self.pos.tensor[:t]
        mask = causal_mask(t, n_prefix)
        for l, layer in enumerate(self.layers):
            extra = prefix[l] if prefix is not None else None
            normed = layer["ln1"](x)
            x = x + layer["attn"](normed, normed, mask=mask, extra_kv=extra)
            x = x + layer["ffn"](layer["ln2"](x))
        return self.ln_f(x)

    def forward(self, token_ids, prefix: Tensor | None = None) -> Tensor:
        """token_ids -> logits (t, vocab)."""
        return T.matmul(self.hidden_states(token_ids, prefix), self.head.tensor)

    def greedy_decode(self, prompt_ids, prefix: Tensor | None, max_len: int,
                      eos_id: int) -> list[int]:
        """Argmax decoding (ties break to the lowest token id); returns the
        generated ids, stopping at eos or max_len."""
        if max_len < 1:
            raise ValueError("max_len must be >= 1")
        ids = list(int(i) for i in prompt_ids)
        out: list[int] = []
        with T.no_grad():
            for _ in range(max_len):
                if len(ids) >= self.block_size:
                    break
                logits = self.forward(np.asarray(ids), prefix)
                nxt = int(np.argmax(logits.data[-1]))
                out.append(nxt)
                ids.append(nxt)
                if nxt == eos_id:
                    break
        return out


def next_token_loss(model: BackboneLM, ids: np.ndarray) -> Tensor:
    """Mean cross-entropy of predicting ids[1:] from ids[:-1]."""
    logits = model.forward(ids[:-1])
    logp = T.log_softmax(logits, axis=-1)
    picked = T.gather(logp, ids[1:, None], axis=-1)
    return T.reduce_mean(picked) * -1.0


def build_corpus(instances, tokenizer: Tokenizer, block_size: int,
                 max_sequences: int | None = None) -> list[np.ndarray]:
    """Pretraining sequences: instruction/response pairs plus description
    prose, each clipped to the block size."""
    seqs: list[np.ndarray] = []
    for inst in instances:
        pair = tokenizer.encode(f"{inst.instruction} {inst.response}", bos=True, eos=True)
        seqs.append(pair[:block_size])
        for desc in inst.descriptions:
            seqs.append(tokenizer.encode(desc, bos=True, eos=True)[:block_size])
    if not seqs:
        raise ValueError("pretraining corpus is empty")
    if max_sequences is not None:
        seqs = seqs[:max_sequences]
    return seqs


def pretrain_and_freeze(model: BackboneLM, corpus: list[np.ndarray],
                        rng: np.random.Generator, *, steps: int, lr: float,
                        batch_size: int = 8, target_loss: float = 0.0,
                        log_every: int = 0) -> list[float]:
    """Next-token pretraining until the smoothed loss reaches the target or
    the step budget runs out, then freeze every backbone weight."""
    if not corpus:
        raise ValueError("pretraining corpus is empty")
    opt = AdamW(model.params, lr=lr, weight_decay=0.01)
    losses: list[float] = []
    warmup = max(1, steps // 20)
    for step in range(steps):
        opt.zero_grad()
        total = 0.0
        for _ in range(batch_size):
            seq = corpus[int(rng.integers(len(corpus)))]
            loss = next_token_loss(model, seq) * (1.0 / batch_size)
            T.backward(loss)
            total += loss.item() * batch_size
        opt.step(lr=warmup_lr(lr, step, warmup))
        losses.append(total / batch_size)
        if log_every and (step + 1) % log_every == 0:
            recent = float(np.mean(losses[-log_every:]))
            print(f"pretrain step {step + 1}: loss {recent:.4f}")
        if target_loss and len(losses) >= 20 and float(np.mean(losses[-20:])) < target_loss:
            break
    model.freeze()
    return losses
