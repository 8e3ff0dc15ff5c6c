"""Registered finite-difference gradient checks.

Each entry builds a scalar-valued function at toy sizes and compares tape
gradients against central differences.  The suite covers every primitive
operation, a text-encoder forward, a full graph-transformer layer, and the
composed graph -> prefix -> logits -> loss path.
"""

from __future__ import annotations

import numpy as np

from . import tensor as T
from .backbone import BackboneLM
from .config import TrainConfig
from .graphformer import GraphTransformer, GraphTransformerLayer
from .graphs import Graph, rrwp_raw
from .nodeenc import NodeEncoder
from .pipeline import GraphPrefixModel, masked_response_loss, response_mask
from .tensor import Tensor, grad_check

TOLERANCE = 1e-4


def _rand(rng, *shape):
    return Tensor(rng.normal(0.0, 1.0, size=shape))


def _away_from_zero(rng, *shape, gap=0.3):
    x = rng.normal(0.0, 1.0, size=shape)
    x = np.where(np.abs(x) < gap, gap * np.sign(x) + (x == 0) * gap, x)
    return Tensor(x)


def _op_checks(rng) -> list[tuple[str, float]]:
    checks = []
    a, b = _rand(rng, 3, 4), _rand(rng, 3, 4)
    checks.append(("add", grad_check(lambda p: (p[0] + p[1]).sum(), [a, b])))
    bias = _rand(rng, 4)
    checks.append(("bias_add", grad_check(lambda p: (p[0] + p[1]).mean(), [a, bias])))
    checks.append(("mul", grad_check(lambda p: T.mul(p[0], p[1]).sum(), [a, b])))
    m1, m2 = _rand(rng, 2, 3, 4), _rand(rng, 4, 5)
    checks.append(("matmul", grad_check(lambda p: T.matmul(p[0], p[1]).sum(), [m1, m2])))
    x = _away_from_zero(rng, 3, 4)
    checks.append(("relu", grad_check(lambda p: T.relu(p[0]).sum(), [x])))
    checks.append(("signed_sqrt",
                   grad_check(lambda p: T.signed_sqrt(p[0]).sum(), [x])))
    s = _rand(rng, 3, 5)
    w = Tensor(rng.normal(0, 1, size=(3, 5)))
    checks.append(("softmax",
                   grad_check(lambda p: T.mul(T.softmax(p[0], axis=-1), w).sum(), [s])))
    checks.append(("log_softmax",
                   grad_check(lambda p: T.mul(T.log_softmax(p[0], axis=-1), w).sum(), [s])))
    g, bb = _rand(rng, 4), _rand(rng, 4)
    probe = Tensor(rng.normal(0, 1, size=(3, 4)))
    checks.append(("layer_norm",
                   grad_check(lambda p: T.mul(T.layer_norm(p[0], p[1], p[2]), probe).sum(),
                              [a, g, bb])))
    table = _rand(rng, 6, 4)
    ids = np.array([1, 3, 3, 0])
    checks.append(("embedding",
                   grad_check(lambda p: T.embedding(p[0], ids).mean(), [table])))
    lw, lb = _rand(rng, 4, 3), _rand(rng, 3)
    checks.append(("linear",
                   grad_check(lambda p: T.linear(p[0], p[1], p[2]).sum(), [a, lw, lb])))
    checks.append(("concat",
                   grad_check(lambda p: T.concat([p[0], p[1]], axis=1).mean(), [a, b])))
    checks.append(("broadcast_to",
                   grad_check(lambda p: T.broadcast_to(T.reshape(p[0], (3, 1, 4)),
                                                       (3, 2, 4)).sum(), [a])))
    checks.append(("take", grad_check(lambda p: p[0][1].sum(), [a])))
    gi = np.array([[0], [2], [1]])
    checks.append(("gather", grad_check(lambda p: T.gather(p[0], gi, axis=-1).sum(), [a])))
    checks.append(("sum_axis", grad_check(lambda p: T.reduce_sum(p[0], axis=1).mean(), [a])))
    checks.append(("mean_axis", grad_check(lambda p: T.reduce_mean(p[0], axis=0).sum(), [a])))
    checks.append(("transpose_reshape",
                   grad_check(lambda p: T.reshape(T.transpose(p[0], (1, 0)), (12,)).mean(), [a])))
    return checks


def _nodeenc_check(rng) -> float:
    cfg = TrainConfig(hidden_dim=8, enc_layers=1, dec_layers=1, gt_layers=1, heads=2,
                      backbone_dim=12, backbone_layers=1, backbone_heads=2,
                      prefix_len=2, walk_len=3, block_size=32)
    bb = BackboneLM(vocab_size=11, d_model=cfg.backbone_dim, n_layers=cfg.backbone_layers,
                    n_heads=cfg.backbone_heads, block_size=cfg.block_size, rng=rng)
    bb.freeze()
    enc = NodeEncoder(embed_table=bb.embed, d_model=cfg.hidden_dim, n_heads=cfg.heads,
                      enc_layers=cfg.enc_layers, dec_layers=cfg.dec_layers,
                      backbone_layers=cfg.backbone_layers, prefix_len=cfg.prefix_len,
                      max_len=cfg.block_size, rng=rng)
    ids = np.array([1, 4, 7, 2])
    probe = Tensor(rng.normal(0, 1, size=(cfg.backbone_layers, cfg.prefix_len, cfg.hidden_dim)))

    def fn(_):
        return T.mul(enc(ids), probe).sum()

    point = [enc.down_proj.tensor, enc.query.tensor,
             enc.encoder[0]["attn"].wq.w.tensor, enc.decoder[0]["cross"].wk.w.tensor]
    return grad_check(fn, point)


def _gt_layer_check(rng) -> float:
    d, heads, n = 8, 2, 3
    params = []
    layer = GraphTransformerLayer("gtcheck", d, heads, rng, params)
    graph = Graph.from_edges(n, [(0, 1), (1, 2)])
    raw = rrwp_raw(graph, 3)
    h = Tensor(rng.normal(0, 1, size=(1, n, d)))
    e = Tensor(rng.normal(0, 1, size=(1, n * n, d)))
    probe = Tensor(rng.normal(0, 1, size=(1, n, d)))

    def fn(p):
        h_out, e_out = layer(p[0], p[1])
        return T.mul(h_out, probe).sum() + e_out.mean()

    return grad_check(fn, [h, e, layer.wq.tensor, layer.wa.tensor,
                           layer.ffn_e.up.w.tensor])


def _composed_check(rng) -> float:
    """Gradients through description -> graph rep -> prefix -> logits -> loss."""
    from .tokenizer import Tokenizer, SPECIALS
    vocab = list(SPECIALS) + [f"w{i}" for i in range(12)]
    tok = Tokenizer(vocab)
    cfg = TrainConfig(hidden_dim=8, enc_layers=1, dec_layers=1, gt_layers=1, heads=2,
                      backbone_dim=12, backbone_layers=1, backbone_heads=2,
                      prefix_len=2, walk_len=3, block_size=32)
    bb = BackboneLM(vocab_size=tok.vocab_size, d_model=cfg.backbone_dim,
                    n_layers=cfg.backbone_layers, n_heads=cfg.backbone_heads,
                    block_size=cfg.block_size, rng=rng)
    bb.freeze()
    model = GraphPrefixModel(cfg, tok, bb, rng)
    # non-zero projection so its gradient path is exercised
    model.projection.up_proj.tensor.data[:] = rng.normal(0, 0.3, size=(cfg.hidden_dim, cfg.backbone_dim))

    graph = Graph.from_edges(3, [(0, 1), (1, 2)])
    raw = rrwp_raw(graph, cfg.walk_len)
    desc_ids = (np.array([5, 6, 7]), np.array([8, 9]), np.array([10, 6, 11]))
    full = np.array([tok.bos_id, 5, 9, tok.sep_id, 7, 8, tok.eos_id])
    mask = response_mask(4, full.size)

    class Prep:
        pass

    prep = Prep()
    prep.desc_ids = desc_ids
    prep.raw_walks = raw
    prep.graph = graph
    prep.anchor = 0
    prep.pool_mode = "anchor"
    prep.full_ids = full

    def fn(_):
        logits = bb.forward(full[:-1], model.projection.project(
            model.graph_transformer.pool(
                model.graph_transformer.run(
                    T.concat([T.reshape(model.node_encoder(i), (1, 1, 2, 8)) for i in desc_ids], axis=0),
                    graph, raw),
                "anchor", 0)))
        return masked_response_loss(logits, full[1:], mask)

    point = [model.projection.up_proj.tensor, model.projection.bias.tensor,
             model.node_encoder.query.tensor,
             model.graph_transformer.walk_encoder.lin1.w.tensor,
             model.graph_transformer.layers[0].wq.tensor]
    return grad_check(fn, point)


def run_gradient_suite(seed: int = 0) -> list[tuple[str, float]]:
    rng = np.random.default_rng(seed)
    results = _op_checks(rng)
    results.append(("nodeenc_forward", _nodeenc_check(rng)))
    results.append(("graph_transformer_layer", _gt_layer_check(rng)))
    results.append(("composed_graph_to_loss", _composed_check(rng)))
    return results
