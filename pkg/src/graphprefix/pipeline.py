"""End-to-end models: graph-conditioned prefix tuning and its plain
prefix-tuning counterpart.

The graph model encodes node descriptions, refines them over the graph
structure, pools a representation G, and maps it to per-layer attention
prefixes P = G W + B for the frozen backbone.  With W = 0 the projection
collapses to P = B: exactly the plain model, which is also how training
starts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .backbone import BackboneLM
from .config import TrainConfig
from .graphformer import GraphTransformer
from .graphs import rrwp_raw
from .nodeenc import NodeEncoder
from .taskgen import TaskInstance
from .tensor import Parameter, Tensor
from .tokenizer import Tokenizer

POOLING_BY_TASK = {
    "substructure_counting": "anchor",
    "maximum_triplet_sum": "anchor",
    "shortest_path": "anchor",
    "bipartite_matching": "mean",
}


@dataclass
class PreparedInstance:
    task: str
    desc_ids: tuple[np.ndarray, ...]
    raw_walks: np.ndarray
    graph: "object"
    anchor: int | None
    pool_mode: str
    prompt_ids: np.ndarray   # <bos> instruction <sep>
    full_ids: np.ndarray     # prompt + response + <eos>
    response: str
    answer: int


def prepare_instance(inst: TaskInstance, tokenizer: Tokenizer, cfg: TrainConfig) -> PreparedInstance:
    pool_mode = cfg.pooling if cfg.pooling != "auto" else POOLING_BY_TASK[inst.task]
    anchor = inst.anchors[0] if inst.anchors else None
    instr = tokenizer.encode(inst.instruction, bos=True)
    prompt = np.concatenate([instr, [tokenizer.sep_id]])
    resp = tokenizer.encode(inst.response, eos=True)
    return PreparedInstance(
        task=inst.task,
        desc_ids=tuple(tokenizer.encode(d) for d in inst.descriptions),
        raw_walks=rrwp_raw(inst.graph, cfg.walk_len),
        graph=inst.graph,
        anchor=anchor,
        pool_mode=pool_mode,
        prompt_ids=prompt,
        full_ids=np.concatenate([prompt, resp]),
        response=inst.response,
        answer=inst.answer,
    )


def prepare_dataset(instances, tokenizer: Tokenizer, cfg: TrainConfig) -> list[PreparedInstance]:
    return [prepare_instance(inst, tokenizer, cfg) for inst in instances]


def masked_response_loss(logits: Tensor, targets: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean cross-entropy over the positions where ``mask`` is 1; the
    gradient at every other position is exactly zero."""
    count = float(mask.sum())
    if count == 0:
        raise ValueError("loss mask selects no positions")
    logp = T.log_softmax(logits, axis=-1)
    picked = T.reshape(T.gather(logp, targets[:, None], axis=-1), (targets.size,))
    return T.reduce_sum(T.mul(picked, Tensor(mask))) * (-1.0 / count)


def response_mask(prompt_len: int, total_len: int) -> np.ndarray:
    """Mask over input positions 0..total-2 selecting response targets."""
    mask = np.zeros(total_len - 1, dtype=np.float64)
    mask[prompt_len - 1:] = 1.0
    return mask


def response_nll(backbone, full_ids: np.ndarray, prompt_len: int,
                 prefix: Tensor | None) -> Tensor:
    """Mean response-token cross-entropy.  Response targets are a suffix,
    so only those rows are projected to the vocabulary; the value equals
    masked_response_loss over the full logits."""
    x = backbone.hidden_states(full_ids[:-1], prefix)
    rows = x[prompt_len - 1:]
    logits = T.matmul(rows, backbone.head.tensor)
    logp = T.log_softmax(logits, axis=-1)
    targets = full_ids[prompt_len:]
    picked = T.gather(logp, targets[:, None], axis=-1)
    return T.reduce_mean(picked) * -1.0


class PrefixProjection:
    """P = G W + B.  W starts at zero, so training begins exactly at plain
    prefix tuning with prefix tensor B."""

    def __init__(self, d_model: int, d_backbone: int, n_layers: int,
                 prefix_len: int, rng: np.random.Generator):
        self.up_proj = Parameter("prefix.up_proj", np.zeros((d_model, d_backbone)))
        self.bias = Parameter("prefix.bias",
                              T.normal_init(rng, (n_layers, prefix_len, d_backbone), 0.02))
        self.params = [self.up_proj, self.bias]

    def project(self, graph_rep: Tensor) -> Tensor:
        if graph_rep.shape[:2] != self.bias.tensor.shape[:2]:
            raise ValueError(f"graph representation shape {graph_rep.shape} does not "
                             f"match prefix {self.bias.tensor.shape}")
        return T.matmul(graph_rep, self.up_proj.tensor) + self.bias.tensor


class GraphPrefixModel:
    def __init__(self, cfg: TrainConfig, tokenizer: Tokenizer, backbone: BackboneLM,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.tokenizer = tokenizer
        self.backbone = backbone
        self.node_encoder = NodeEncoder(
            embed_table=backbone.embed, d_model=cfg.hidden_dim, n_heads=cfg.heads,
            enc_layers=cfg.enc_layers, dec_layers=cfg.dec_layers,
            backbone_layers=cfg.backbone_layers, prefix_len=cfg.prefix_len,
            max_len=cfg.block_size, rng=rng)
        self.graph_transformer = GraphTransformer(
            d_model=cfg.hidden_dim, n_heads=cfg.heads, n_layers=cfg.gt_layers,
            walk_len=cfg.walk_len, rng=rng)
        self.projection = PrefixProjection(cfg.hidden_dim, cfg.backbone_dim,
                                           cfg.backbone_layers, cfg.prefix_len, rng)

    def trainable_parameters(self) -> list[Parameter]:
        return (self.node_encoder.params + self.graph_transformer.params
                + self.projection.params)

    def all_parameters(self) -> list[Parameter]:
        return self.trainable_parameters() + self.backbone.params

    def graph_rep(self, prep: PreparedInstance) -> Tensor:
        stacked = self.node_encoder.encode_all(prep.desc_ids)
        refined = self.graph_transformer.run(stacked, prep.graph, prep.raw_walks)
        return self.graph_transformer.pool(refined, prep.pool_mode, prep.anchor)

    def prefix(self, prep: PreparedInstance) -> Tensor:
        return self.projection.project(self.graph_rep(prep))

    def logits(self, prep: PreparedInstance, ids: np.ndarray | None = None) -> Tensor:
        ids = prep.full_ids[:-1] if ids is None else ids
        return self.backbone.forward(ids, self.prefix(prep))

    def loss(self, prep: PreparedInstance) -> Tensor:
        return response_nll(self.backbone, prep.full_ids, prep.prompt_ids.size,
                            self.prefix(prep))

    def batch_loss(self, preps: list[PreparedInstance]) -> Tensor:
        """Mean loss over a batch, sharing encoder and graph passes across
        instances; equal to averaging the per-instance losses."""
        counts = [len(p.desc_ids) for p in preps]
        all_ids = [ids for p in preps for ids in p.desc_ids]
        encoded = self.node_encoder.encode_all(all_ids)
        blocks, off = [], 0
        for c in counts:
            blocks.append(encoded[off:off + c])
            off += c
        refined = self.graph_transformer.run_many(
            blocks, [p.graph for p in preps], [p.raw_walks for p in preps])
        total = None
        for prep, rb in zip(preps, refined):
            g = self.graph_transformer.pool(rb, prep.pool_mode, prep.anchor)
            nll = response_nll(self.backbone, prep.full_ids, prep.prompt_ids.size,
                               self.projection.project(g)) * (1.0 / len(preps))
            total = nll if total is None else total + nll
        return total

    def predict(self, prep: PreparedInstance, max_new_tokens: int) -> str:
        with T.no_grad():
            p = self.prefix(prep)
        out = self.backbone.greedy_decode(prep.prompt_ids, p, max_new_tokens,
                                          self.tokenizer.eos_id)
        return self.tokenizer.decode(out)


class PrefixOnlyModel:
    """Plain prefix tuning: one trainable prefix tensor, no graph input."""

    def __init__(self, cfg: TrainConfig, tokenizer: Tokenizer, backbone: BackboneLM,
                 rng: np.random.Generator):
        self.cfg = cfg
        self.tokenizer = tokenizer
        self.backbone = backbone
        self.bias = Parameter(
            "prefix.bias",
            T.normal_init(rng, (cfg.backbone_layers, cfg.prefix_len, cfg.backbone_dim), 0.02))

    def trainable_parameters(self) -> list[Parameter]:
        return [self.bias]

    def all_parameters(self) -> list[Parameter]:
        return self.trainable_parameters() + self.backbone.params

    def prefix(self, prep: PreparedInstance) -> Tensor:
        return self.bias.tensor

    def logits(self, prep: PreparedInstance, ids: np.ndarray | None = None) -> Tensor:
        ids = prep.full_ids[:-1] if ids is None else ids
        return self.backbone.forward(ids, self.bias.tensor)

    def loss(self, prep: PreparedInstance) -> Tensor:
        return response_nll(self.backbone, prep.full_ids, prep.prompt_ids.size,
                            self.bias.tensor)

    def predict(self, prep: PreparedInstance, max_new_tokens: int) -> str:
        out = self.backbone.greedy_decode(prep.prompt_ids, self.bias.tensor,
                                          max_new_tokens, self.tokenizer.eos_id)
        return self.tokenizer.decode(out)
