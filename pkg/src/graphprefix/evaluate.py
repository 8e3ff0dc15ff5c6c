"""Evaluation: greedy decoding, normalized exact match, metric reports."""

from __future__ import annotations

import csv
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

_INT_RE = re.compile(r"-?\d+")


def extract_answer(text: str) -> int | None:
    """The integer payload of a response: its last integer literal."""
    hits = _INT_RE.findall(text)
    return int(hits[-1]) if hits else None


def answers_match(predicted: str, gold: str) -> bool:
    """Exact match after normalization: trim whitespace and compare the
    integer answers; texts without an integer fall back to string equality."""
    p, g = extract_answer(predicted), extract_answer(gold)
    if p is not None and g is not None:
        return p == g
    return predicted.strip() == gold.strip()


@dataclass
class Metrics:
    task: str
    method: str
    seed: int
    exact_match: float
    mean_context_tokens: float
    wall_time_s: float
    n_instances: int = 0

    def row(self) -> list:
        return [self.task, self.method, self.seed,
                f"{self.exact_match:.4f}", f"{self.mean_context_tokens:.1f}",
                f"{self.wall_time_s:.2f}"]


CSV_HEADER = ["task", "method", "seed", "exact_match", "mean_context_tokens", "wall_time_s"]


def evaluate_model(model, dataset, max_new_tokens: int,
                   context_tokens: float = 0.0, method: str = "graph_prefix",
                   seed: int = 0) -> Metrics:
    t0 = time.time()
    hits = 0
    for prep in dataset:
        pred = model.predict(prep, max_new_tokens)
        if answers_match(pred, prep.response):
            hits += 1
    task = dataset[0].task if dataset else "?"
    return Metrics(task=task, method=method, seed=seed,
                   exact_match=hits / len(dataset) if dataset else 0.0,
                   mean_context_tokens=context_tokens,
                   wall_time_s=time.time() - t0, n_instances=len(dataset))


def write_metrics_csv(metrics: list[Metrics], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for m in metrics:
            writer.writerow(m.row())


def read_metrics_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def summarize(rows: list[dict]) -> str:
    """Markdown table of exact match as mean ± s.d. across seeds."""
    if not rows:
        return "| task | method | exact_match | context_tokens |\n|---|---|---|---|\n"
    groups: dict[tuple[str, str], list[dict]] = {}
    for r in rows:
        groups.setdefault((r["task"], r["method"]), []).append(r)
    lines = ["| task | method | exact_match | context_tokens |",
             "|---|---|---|---|"]
    for (task, method), rs in sorted(groups.items()):
        accs = np.array([float(r["exact_match"]) for r in rs])
        ctx = np.mean([float(r["mean_context_tokens"]) for r in rs])
        lines.append(f"| {task} | {method} | {accs.mean():.4f} ± {accs.std():.4f} "
                     f"| {ctx:.1f} |")
    return "\n".join(lines) + "\n"
