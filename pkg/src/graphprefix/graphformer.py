"""Graph transformer over random-walk relative positional encodings.

Node-pair features start as an elementwise MLP of the walk-probability
stack [I, M, M^2, ...] and are refined layer by layer together with the
node states.  Attention logits come from the pair features (signed-sqrt
gated by the query/key sum), are normalized over the full node set, and
the per-slot node blocks from the text encoder are processed independently
with one shared weight stack.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .graphs import Graph, rrwp_raw
from .layers import FeedForward, LayerNorm, Linear
from .tensor import Parameter, Tensor


class WalkEncoder:
    """Elementwise two-layer ReLU MLP from walk-length features to width d."""

    def __init__(self, walk_len: int, d_model: int, rng, params: list[Parameter]):
        self.walk_len = walk_len
        self.lin1 = Linear("walkenc.lin1", walk_len, d_model, rng, params)
        self.lin2 = Linear("walkenc.lin2", d_model, d_model, rng, params)

    def __call__(self, raw: np.ndarray) -> Tensor:
        """raw: (n, n, walk_len) -> pair encodings (n, n, d)."""
        n = raw.shape[0]
        flat = Tensor(raw.reshape(n * n, self.walk_len))
        out = self.lin2(T.relu(self.lin1(flat)))
        return T.reshape(out, (n, n, out.shape[-1]))


class GraphTransformerLayer:
    def __init__(self, name: str, d_model: int, n_heads: int, rng,
                 params: list[Parameter]):
        if d_model % n_heads:
            raise ValueError(f"{name}: width {d_model} not divisible by {n_heads} heads")
        self.d = d_model
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        p = params
        init = lambda: T.fan_in_init(rng, d_model, (d_model, d_model))
        self.wq = Parameter(f"{name}.wq", init()); p.append(self.wq)
        self.wk = Parameter(f"{name}.wk", init()); p.append(self.wk)
        self.wew = Parameter(f"{name}.wew", init()); p.append(self.wew)
        self.web = Parameter(f"{name}.web", init()); p.append(self.web)
        self.wv = Parameter(f"{name}.wv", init()); p.append(self.wv)
        self.wa = Parameter(f"{name}.wa",
                            T.fan_in_init(rng, self.d_head, (n_heads, self.d_head)))
        p.append(self.wa)
        self.wo = Parameter(f"{name}.wo", init()); p.append(self.wo)
        self.weo = Parameter(f"{name}.weo", init()); p.append(self.weo)
        self.ln_h = LayerNorm(f"{name}.ln_h", d_model, p)
        self.ln_e = LayerNorm(f"{name}.ln_e", d_model, p)
        self.ffn_h = FeedForward(f"{name}.ffn_h", d_model, 2 * d_model, rng, p)
        self.ffn_e = FeedForward(f"{name}.ffn_e", d_model, 2 * d_model, rng, p)
        self.ln_h2 = LayerNorm(f"{name}.ln_h2", d_model, p)
        self.ln_e2 = LayerNorm(f"{name}.ln_e2", d_model, p)

    def attention(self, h: Tensor, e: Tensor,
                  layer_index: int = 0) -> tuple[Tensor, Tensor, Tensor]:
        """Pair update, attention weights, and the pre-residual mixed node
        states.  h: (slices, n, d); e: (slices, n*n, d)."""
        s, n, d = h.shape
        nh, dh = self.n_heads, self.d_head
        q = T.matmul(h, self.wq.tensor)
        k = T.matmul(h, self.wk.tensor)
        v = T.matmul(h, self.wv.tensor)
        ew = T.reshape(T.matmul(e, self.wew.tensor), (s, n, n, d))
        eb = T.reshape(T.matmul(e, self.web.tensor), (s, n, n, d))

        qi = T.broadcast_to(T.reshape(q, (s, n, 1, d)), (s, n, n, d))
        kj = T.broadcast_to(T.reshape(k, (s, 1, n, d)), (s, n, n, d))
        ehat = T.relu(T.signed_sqrt(T.mul(qi + kj, ew)) + eb)
        if not np.isfinite(ehat.data).all():
            raise ValueError(f"graph transformer layer {layer_index}: non-finite pair update")

        heads = T.reshape(ehat, (s, n, n, nh, dh))
        wa = T.broadcast_to(T.reshape(self.wa.tensor, (1, 1, 1, nh, dh)),
                            (s, n, n, nh, dh))
        scores = T.reduce_sum(T.mul(heads, wa), axis=-1)      # (s, n, n, nh)
        alpha = T.softmax(scores, axis=2)                     # over target node j
        vh = T.transpose(T.reshape(v, (s, n, nh, dh)), (0, 2, 1, 3))
        ah = T.transpose(alpha, (0, 3, 1, 2))                 # (s, nh, n, n)
        mixed = T.matmul(ah, vh)                              # (s, nh, n, dh)
        h_att = T.reshape(T.transpose(mixed, (0, 2, 1, 3)), (s, n, d))
        return ehat, alpha, h_att

    def __call__(self, h: Tensor, e: Tensor, layer_index: int = 0) -> tuple[Tensor, Tensor]:
        """h: (slices, n, d); e: (slices, n*n, d).  Returns updated (h, e)."""
        s, n, d = h.shape
        ehat, _, h_att = self.attention(h, e, layer_index)
        h_res = self.ln_h(T.matmul(h_att, self.wo.tensor) + h)
        e_flat = T.reshape(ehat, (s, n * n, d))
        e_res = self.ln_e(T.matmul(e_flat, self.weo.tensor) + e)
        h_out = self.ln_h2(self.ffn_h(h_res) + h_res)
        e_out = self.ln_e2(self.ffn_e(e_res) + e_res)
        return h_out, e_out


class GraphTransformer:
    def __init__(self, *, d_model: int, n_heads: int, n_layers: int,
                 walk_len: int, rng: np.random.Generator):
        self.d = d_model
        self.walk_len = walk_len
        self.params: list[Parameter] = []
        self.walk_encoder = WalkEncoder(walk_len, d_model, rng, self.params)
        self.layers = [GraphTransformerLayer(f"gt{i}", d_model, n_heads, rng, self.params)
                       for i in range(n_layers)]

    def rrwp_encode(self, raw: np.ndarray) -> Tensor:
        return self.walk_encoder(raw)

    def run(self, node_blocks: Tensor, graph: Graph,
            raw_walks: np.ndarray | None = None) -> Tensor:
        """node_blocks: (n, L, K, d) from the text encoder.  Every (L, K)
        slice is refined independently through the shared layer stack;
        pair encodings restart from the walk features for each pass."""
        n, L, K, d = node_blocks.shape
        if n != graph.n:
            raise ValueError(f"node blocks for {n} nodes but graph has {graph.n}")
        if not self.layers:
            return node_blocks
        if raw_walks is None:
            raw_walks = rrwp_raw(graph, self.walk_len)
        s = L * K
        h = T.reshape(T.transpose(node_blocks, (1, 2, 0, 3)), (s, n, d))
        e0 = self.rrwp_encode(raw_walks)
        e = T.broadcast_to(T.reshape(e0, (1, n * n, d)), (s, n * n, d))
        for i, layer in enumerate(self.layers):
            h, e = layer(h, e, layer_index=i)
        return T.transpose(T.reshape(h, (L, K, n, d)), (2, 0, 1, 3))

    def run_many(self, node_blocks_list: list[Tensor], graphs: list[Graph],
                 raw_list: list[np.ndarray]) -> list[Tensor]:
        """Batched form of :meth:`run`: instances with the same node count
        share one pass by stacking their slices, which is arithmetically
        identical to running them one at a time."""
        if not self.layers:
            return list(node_blocks_list)
        groups: dict[int, list[int]] = {}
        for i, g in enumerate(graphs):
            groups.setdefault(g.n, []).append(i)
        outs: list[Tensor | None] = [None] * len(graphs)
        for n, members in sorted(groups.items()):
            hs, es = [], []
            for i in members:
                nb = node_blocks_list[i]
                _, L, K, d = nb.shape
                s = L * K
                hs.append(T.reshape(T.transpose(nb, (1, 2, 0, 3)), (s, n, d)))
                e0 = self.rrwp_encode(raw_list[i])
                es.append(T.broadcast_to(T.reshape(e0, (1, n * n, d)), (s, n * n, d)))
            h = T.concat(hs, axis=0) if len(hs) > 1 else hs[0]
            e = T.concat(es, axis=0) if len(es) > 1 else es[0]
            for li, layer in enumerate(self.layers):
                h, e = layer(h, e, layer_index=li)
            for pos, i in enumerate(members):
                hi = h[pos * s:(pos + 1) * s]
                outs[i] = T.transpose(T.reshape(hi, (L, K, n, d)), (2, 0, 1, 3))
        return outs

    @staticmethod
    def pool(node_blocks: Tensor, mode: str, anchor: int | None = None) -> Tensor:
        """Collapse (n, L, K, d) to the graph representation (L, K, d)."""
        if mode == "mean":
            return T.reduce_mean(node_blocks, axis=0)
        if mode == "anchor":
            n = node_blocks.shape[0]
            if anchor is None or not (0 <= anchor < n):
                raise ValueError(f"invalid anchor {anchor} for {n} nodes")
            return node_blocks[anchor]
        raise ValueError(f"unknown pooling mode: {mode}")
