"""Context-length scaling study: serialized-graph prompts grow with node
count while the graph-prefix context stays at instruction + fixed slots."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .baselines import (GraphTextFormat, count_context_tokens,
                        graph_prefix_context_tokens, serialize_graph)
from .config import TrainConfig
from .taskgen import generate


@dataclass
class ScalingRow:
    size: int
    method: str
    context_tokens: float
    accuracy: float | None = None


def scaling_experiment(task: str, node_counts, cfg: TrainConfig, seed: int = 0,
                       sample_size: int = 50) -> list[ScalingRow]:
    """Measure mean context tokens per pipeline at each graph size."""
    counts = list(node_counts)
    if counts != sorted(counts) or len(set(counts)) != len(counts):
        raise ValueError("node_counts must be strictly increasing")
    fmt = GraphTextFormat("adjacency_list")
    rows: list[ScalingRow] = []
    for size in counts:
        insts = generate(task, sample_size, avg_n=size, seed=seed)
        g2t = float(np.mean([count_context_tokens(serialize_graph(i, fmt)) for i in insts]))
        ours = float(np.mean([graph_prefix_context_tokens(i, cfg.prefix_len) for i in insts]))
        rows.append(ScalingRow(size, "graph2text_zero_shot", g2t))
        rows.append(ScalingRow(size, "graph_prefix", ours))
    return rows


def write_scaling_csv(rows: list[ScalingRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", "method", "context_tokens", "accuracy"])
        for r in rows:
            acc = "" if r.accuracy is None else f"{r.accuracy:.4f}"
            writer.writerow([r.size, r.method, f"{r.context_tokens:.1f}", acc])
