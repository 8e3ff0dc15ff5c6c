"""Textual encoder-decoder that turns a node description into a fixed-shape
representation.

The description's tokens are embedded with the backbone's frozen table,
down-projected, and passed through an unmasked transformer encoder.  A set
of trainable queries (one per backbone layer and prefix slot) then
cross-attends into the encoded sequence, producing one (layers, slots,
width) block per node, independent of every other node.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .layers import FeedForward, LayerNorm, Linear, MultiHeadAttention
from .tensor import Parameter, Tensor


class NodeEncoder:
    def __init__(self, *, embed_table: Parameter, d_model: int, n_heads: int,
                 enc_layers: int, dec_layers: int, backbone_layers: int,
                 prefix_len: int, max_len: int, rng: np.random.Generator):
        self.embed_table = embed_table  # frozen; owned by the backbone
        self.d = d_model
        self.L = backbone_layers
        self.K = prefix_len
        self.max_len = max_len
        self.params: list[Parameter] = []
        p = self.params

        d_embed = embed_table.tensor.shape[1]
        self.down_proj = Parameter("nodeenc.down_proj",
                                   T.fan_in_init(rng, d_embed, (d_embed, d_model)))
        p.append(self.down_proj)
        self.pos = Parameter("nodeenc.pos", T.normal_init(rng, (max_len, d_model), 0.02))
        p.append(self.pos)

        self.encoder = []
        for i in range(enc_layers):
            name = f"nodeenc.enc{i}"
            self.encoder.append({
                "ln1": LayerNorm(f"{name}.ln1", d_model, p),
                "attn": MultiHeadAttention(f"{name}.attn", d_model, n_heads, rng, p),
                "ln2": LayerNorm(f"{name}.ln2", d_model, p),
                "ffn": FeedForward(f"{name}.ffn", d_model, 2 * d_model, rng, p),
            })
        self.decoder = []
        for i in range(dec_layers):
            name = f"nodeenc.dec{i}"
            self.decoder.append({
                "lnq": LayerNorm(f"{name}.lnq", d_model, p),
                "cross": MultiHeadAttention(f"{name}.cross", d_model, n_heads, rng, p),
                "ln2": LayerNorm(f"{name}.ln2", d_model, p),
                "ffn": FeedForward(f"{name}.ffn", d_model, 2 * d_model, rng, p),
            })
        self.query = Parameter(
            "nodeenc.query",
            T.normal_init(rng, (self.L, self.K, d_model), 1.0 / np.sqrt(d_model)))
        p.append(self.query)

    def encode_description(self, token_ids) -> Tensor:
        """Token ids -> contextualized sequence (t, d)."""
        ids = np.asarray(token_ids, dtype=np.int64)
        if ids.size == 0:
            raise ValueError("encode_description: empty token sequence")
        if ids.size > self.max_len:
            raise ValueError(f"description of {ids.size} tokens exceeds max length {self.max_len}")
        x = T.matmul(T.embedding(self.embed_table.tensor, ids), self.down_proj.tensor)
        x = x + self.pos.tensor[: ids.size]
        for layer in self.encoder:
            normed = layer["ln1"](x)
            x = x + layer["attn"](normed, normed)
            x = x + layer["ffn"](layer["ln2"](x))
        return x

    def decode_queries(self, context: Tensor) -> Tensor:
        """Cross-attend the trainable queries into one node's context;
        returns the (L, K, d) node representation."""
        if self.query.tensor.shape != (self.L, self.K, self.d):
            raise ValueError("query embedding shape does not match configuration")
        q = T.reshape(self.query.tensor, (self.L * self.K, self.d))
        for layer in self.decoder:
            q = q + layer["cross"](layer["lnq"](q), context)
            q = q + layer["ffn"](layer["ln2"](q))
        return T.reshape(q, (self.L, self.K, self.d))

    def __call__(self, token_ids) -> Tensor:
        return self.decode_queries(self.encode_description(token_ids))

    def encode_all(self, id_sequences) -> Tensor:
        """Encode every node of one graph, batching descriptions of equal
        token length together (no padding, so each node's block matches the
        single-node path).  Returns (n, L, K, d)."""
        groups: dict[int, list[int]] = {}
        for i, ids in enumerate(id_sequences):
            groups.setdefault(len(ids), []).append(i)
        n = len(id_sequences)
        lk = self.L * self.K
        blocks: list[Tensor | None] = [None] * n
        for length, members in sorted(groups.items()):
            if length == 0:
                raise ValueError("encode_all: empty token sequence")
            if length > self.max_len:
                raise ValueError(f"description of {length} tokens exceeds max length {self.max_len}")
            b = len(members)
            flat = np.concatenate([np.asarray(id_sequences[i], dtype=np.int64)
                                   for i in members])
            x = T.matmul(T.embedding(self.embed_table.tensor, flat), self.down_proj.tensor)
            x = T.reshape(x, (b, length, self.d))
            pos = T.broadcast_to(T.reshape(self.pos.tensor[:length], (1, length, self.d)),
                                 (b, length, self.d))
            x = x + pos
            for layer in self.encoder:
                normed = layer["ln1"](x)
                x = x + layer["attn"](normed, normed)
                x = x + layer["ffn"](layer["ln2"](x))
            q = T.broadcast_to(
                T.reshape(self.query.tensor, (1, lk, self.d)), (b, lk, self.d))
            for layer in self.decoder:
                q = q + layer["cross"](layer["lnq"](q), x)
                q = q + layer["ffn"](layer["ln2"](q))
            for pos_in_group, i in enumerate(members):
                blocks[i] = T.reshape(q[pos_in_group], (1, self.L, self.K, self.d))
        return T.concat(blocks, axis=0)
