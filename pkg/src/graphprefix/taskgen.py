"""Synthetic dataset generation for the four graph reasoning tasks.

Every instance is reproducible from (task, seed, index): each index spawns
its own child RNG, so generation order never matters and splits built from
disjoint index spaces never overlap.  Ground-truth answers come from the
exact solvers in :mod:`graphprefix.oracles`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import templates
from .graphs import Graph, is_connected
from .oracles import (oracle_bipartite_matching, oracle_shortest_path,
                      oracle_substructure, oracle_triplet_sum)

TASK_IDS = {t: i for i, t in enumerate(templates.TASKS)}

# Structural targets per task: default node count and mean edge count.
TASK_DEFAULTS = {
    "substructure_counting": (15, 22.3),
    "maximum_triplet_sum": (15, 26.6),
    "shortest_path": (20, 32.4),
    "bipartite_matching": (20, 14.0),
}

DEFAULT_LABEL_WEIGHTS = {"C": 0.45, "O": 0.20, "N": 0.15, "H": 0.12, "S": 0.08}

MAX_TRIES = 500


class GenerationError(RuntimeError):
    pass


@dataclass
class TaskInstance:
    task: str
    graph: Graph
    descriptions: tuple[str, ...]
    attrs: tuple[dict, ...]
    anchors: tuple[int, ...]
    instruction: str
    response: str
    answer: int
    seed: int


def child_seed(task: str, seed: int, index: int, split: int = 0) -> int:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(TASK_IDS[task], split, index))
    return int(ss.generate_state(1)[0])


def _edge_prob(task: str) -> float:
    n0, m0 = TASK_DEFAULTS[task]
    if task == "bipartite_matching":
        half = n0 // 2
        return m0 / (half * half)
    if task == "shortest_path":
        # connectivity rejection keeps denser samples; compensate so the
        # accepted graphs still average the target edge count
        return 0.153
    return m0 / (n0 * (n0 - 1) / 2)


def _sample_graph(rng: np.random.Generator, n: int, p: float) -> Graph:
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = rng.random(len(pairs)) < p
    return Graph.from_edges(n, [pq for pq, keep in zip(pairs, mask) if keep])


def _sample_bipartite(rng: np.random.Generator, half: int, p: float) -> Graph:
    pairs = [(i, half + j) for i in range(half) for j in range(half)]
    mask = rng.random(len(pairs)) < p
    partition = [0] * half + [1] * half
    return Graph.from_edges(2 * half, [pq for pq, keep in zip(pairs, mask) if keep], partition)


def _pick(rng: np.random.Generator, pool):
    return pool[int(rng.integers(len(pool)))]


def _check_answer_token(answer: int) -> None:
    if answer not in templates._NUMBER_SET:
        raise GenerationError(f"answer {answer} outside the tokenizer number pool")


def generate_instance(task: str, seed: int, index: int, *, avg_n: int | None = None,
                      split: int = 0, edge_prob: float | None = None,
                      label_weights: dict | None = None,
                      answer_cap: int | None = None,
                      balance_answers: bool = False) -> TaskInstance:
    """Build one instance from its child seed.  Bounded rejection-resampling
    enforces the per-task structural guarantees."""
    cseed = child_seed(task, seed, index, split)
    rng = np.random.default_rng(cseed)
    n0, _ = TASK_DEFAULTS[task]
    avg_n = n0 if avg_n is None else avg_n
    if avg_n < 4:
        raise ValueError(f"avg_n must be >= 4, got {avg_n}")
    p = _edge_prob(task) if edge_prob is None else edge_prob

    if task == "substructure_counting":
        return _gen_counting(rng, cseed, avg_n, p, label_weights, answer_cap, balance_answers)
    if task == "maximum_triplet_sum":
        return _gen_triplet(rng, cseed, avg_n, p)
    if task == "shortest_path":
        return _gen_path(rng, cseed, avg_n, p)
    if task == "bipartite_matching":
        return _gen_matching(rng, cseed, avg_n, p)
    raise ValueError(f"unknown task: {task}")


def generate(task: str, count: int, avg_n: int | None = None, seed: int = 0,
             **options) -> list[TaskInstance]:
    if count < 1:
        raise ValueError("count must be >= 1")
    return [generate_instance(task, seed, i, avg_n=avg_n, **options)
            for i in range(count)]


def generate_splits(task: str, sizes=(2000, 2000, 6000), seed: int = 0,
                    avg_n: int | None = None, **options) -> tuple[list[TaskInstance], ...]:
    """Train/validation/test splits on disjoint child-seed spaces."""
    return tuple(
        [generate_instance(task, seed, i, avg_n=avg_n, split=s, **options)
         for i in range(size)]
        for s, size in enumerate(sizes)
    )


def _sample_n(rng: np.random.Generator, avg_n: int) -> int:
    return max(4, int(rng.integers(avg_n - 2, avg_n + 3)))


def _gen_counting(rng, cseed, avg_n, p, label_weights, answer_cap, balance_answers):
    weights = DEFAULT_LABEL_WEIGHTS if label_weights is None else label_weights
    symbols = list(weights)
    probs = np.asarray([weights[s] for s in symbols], dtype=np.float64)
    probs = probs / probs.sum()
    target = int(rng.integers(0, answer_cap + 1)) if balance_answers and answer_cap else None

    for attempt in range(MAX_TRIES):
        n = _sample_n(rng, avg_n)
        graph = _sample_graph(rng, n, p)
        labels = [symbols[k] for k in rng.choice(len(symbols), size=n, p=probs)]
        anchor = int(rng.integers(n))
        answer = oracle_substructure(graph, labels, anchor)
        if answer_cap is not None and answer > answer_cap:
            continue
        if target is not None and answer != target and attempt < MAX_TRIES - 10:
            continue
        break
    else:
        raise GenerationError("substructure_counting: answer constraints unsatisfied")

    _check_answer_token(answer)
    attrs = []
    for lab in labels:
        name, z, mass = templates.ELEMENTS[lab]
        attrs.append({
            "label": lab, "name": name, "z": z, "mass": mass,
            "radius": int(_pick(rng, templates.RADIUS_POOL)),
            "bonds": int(_pick(rng, templates.BOND_POOL)),
        })
    descriptions = tuple(
        templates.render_description(templates.ATOM_TEMPLATE,
                                     {"symbol": a["label"], **{k: a[k] for k in
                                      ("name", "z", "mass", "radius", "bonds")}}, rng)
        for a in attrs
    )
    return TaskInstance(
        task="substructure_counting", graph=graph, descriptions=descriptions,
        attrs=tuple(attrs), anchors=(anchor,),
        instruction=templates.instruction_text("substructure_counting", (anchor,)),
        response=templates.response_text("substructure_counting", answer),
        answer=answer, seed=cseed,
    )


def _gen_triplet(rng, cseed, avg_n, p):
    for _ in range(MAX_TRIES):
        n = _sample_n(rng, avg_n)
        graph = _sample_graph(rng, n, p)
        candidates = []
        for v in range(n):
            ok = any(g != v and g != f
                     for f in graph.neighbors(v) for g in graph.neighbors(f))
            if ok:
                candidates.append(v)
        if candidates:
            break
    else:
        raise GenerationError("maximum_triplet_sum: no anchor with a valid triplet")

    anchor = int(_pick(rng, candidates))
    ages = [int(_pick(rng, templates.AGE_POOL)) for _ in range(n)]
    answer = oracle_triplet_sum(graph, ages, anchor)
    _check_answer_token(answer)
    attrs = []
    for age in ages:
        name = f"{_pick(rng, templates.FIRST_NAMES)} {_pick(rng, templates.LAST_NAMES)}"
        attrs.append({"name": name, "age": age})
    descriptions = tuple(
        templates.render_description(templates.PERSON_TEMPLATE, a, rng) for a in attrs
    )
    return TaskInstance(
        task="maximum_triplet_sum", graph=graph, descriptions=descriptions,
        attrs=tuple(attrs), anchors=(anchor,),
        instruction=templates.instruction_text("maximum_triplet_sum", (anchor,)),
        response=templates.response_text("maximum_triplet_sum", answer),
        answer=answer, seed=cseed,
    )


def _gen_path(rng, cseed, avg_n, p):
    for _ in range(MAX_TRIES):
        n = _sample_n(rng, avg_n)
        graph = _sample_graph(rng, n, p)
        if is_connected(graph):
            break
    else:
        raise GenerationError("shortest_path: could not sample a connected graph")

    source, target = (int(x) for x in rng.choice(n, size=2, replace=False))
    costs = [int(_pick(rng, templates.COST_POOL)) for _ in range(n)]
    answer = oracle_shortest_path(graph, costs, source, target)
    _check_answer_token(answer)
    attrs = []
    for i in range(n):
        attrs.append({
            "cost": costs[i],
            "galaxy": _pick(rng, templates.GALAXIES),
            "distance": int(_pick(rng, templates.DISTANCE_POOL)),
        })
    descriptions = tuple(
        templates.render_description(
            templates.WORMHOLE_TEMPLATE, {"index": i + 1, **attrs[i]}, rng)
        for i in range(n)
    )
    return TaskInstance(
        task="shortest_path", graph=graph, descriptions=descriptions,
        attrs=tuple(attrs), anchors=(source, target),
        instruction=templates.instruction_text("shortest_path", (source, target)),
        response=templates.response_text("shortest_path", answer),
        answer=answer, seed=cseed,
    )


def _gen_matching(rng, cseed, avg_n, p):
    half = max(2, avg_n // 2 + int(rng.integers(-1, 2)))
    graph = _sample_bipartite(rng, half, p)
    answer = oracle_bipartite_matching(graph)
    _check_answer_token(answer)
    attrs = []
    for i in range(2 * half):
        if graph.partition[i] == 0:
            name = f"{_pick(rng, templates.FIRST_NAMES)} {_pick(rng, templates.LAST_NAMES)}"
            attrs.append({
                "kind": "applicant", "name": name,
                "age": int(_pick(rng, templates.AGE_POOL)),
                "role": _pick(rng, templates.ROLES),
            })
        else:
            attrs.append({
                "kind": "job", "role": _pick(rng, templates.ROLES),
                "salary": int(_pick(rng, templates.SALARY_POOL)),
                "hours": int(_pick(rng, templates.HOURS_POOL)),
            })
    descriptions = []
    for a in attrs:
        if a["kind"] == "applicant":
            tpl = templates.APPLICANT_TEMPLATE
            slots = {k: a[k] for k in ("name", "age", "role")}
        else:
            tpl = templates.JOB_TEMPLATE
            slots = {k: a[k] for k in ("role", "salary", "hours")}
        descriptions.append(templates.render_description(tpl, slots, rng))
    return TaskInstance(
        task="bipartite_matching", graph=graph, descriptions=tuple(descriptions),
        attrs=tuple(attrs), anchors=(),
        instruction=templates.instruction_text("bipartite_matching", ()),
        response=templates.response_text("bipartite_matching", answer),
        answer=answer, seed=cseed,
    )


# -- JSONL serialization -----------------------------------------------------


def instance_to_record(inst: TaskInstance) -> dict:
    attrs = [dict(a, description=d) for a, d in zip(inst.attrs, inst.descriptions)]
    record = {
        "task": inst.task,
        "nodes": inst.graph.n,
        "edges": [list(e) for e in inst.graph.sorted_edges()],
        "attrs": attrs,
        "anchors": list(inst.anchors),
        "instruction": inst.instruction,
        "response": inst.response,
        "answer": inst.answer,
        "seed": inst.seed,
    }
    if inst.graph.partition is not None:
        record["partition"] = list(inst.graph.partition)
    return record


def record_to_instance(record: dict) -> TaskInstance:
    attrs = []
    descriptions = []
    for a in record["attrs"]:
        a = dict(a)
        descriptions.append(a.pop("description"))
    # separate loop keeps attr dict ordering identical to emission
    attrs = [dict((k, v) for k, v in a.items() if k != "description")
             for a in record["attrs"]]
    graph = Graph.from_edges(record["nodes"],
                             [tuple(e) for e in record["edges"]],
                             record.get("partition"))
    return TaskInstance(
        task=record["task"], graph=graph, descriptions=tuple(descriptions),
        attrs=tuple(attrs), anchors=tuple(record["anchors"]),
        instruction=record["instruction"], response=record["response"],
        answer=int(record["answer"]), seed=int(record["seed"]),
    )


def emit_jsonl(instances, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for inst in instances:
            fh.write(json.dumps(instance_to_record(inst)) + "\n")


def load_jsonl(path) -> list[TaskInstance]:
    out = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        try:
            out.append(record_to_instance(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ValueError(f"{path}:{lineno}: malformed instance line: {exc}") from exc
    return out
