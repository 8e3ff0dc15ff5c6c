"""Graph-to-text serialization baselines and prompt construction.

A graph instance can be rendered as natural language in two structure
formats (per-node adjacency lines, or a seeded-shuffled edge list) and
wrapped in zero-shot / one-shot / one-shot chain-of-thought prompts.
Token accounting for these prompts backs the context-reduction and
scaling reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import templates
from .graphs import Graph
from .taskgen import TaskInstance
from .tokenizer import split_text

NOUNS = {
    "substructure_counting": "Atom",
    "maximum_triplet_sum": "Person",
    "shortest_path": "Wormhole",
}

DESC_HEADERS = {
    "substructure_counting": "Here are the descriptions of {n} atoms in a molecule.",
    "maximum_triplet_sum": "Here are the descriptions of {n} people.",
    "shortest_path": "Here are the descriptions of {n} wormholes.",
}

STRUCT_HEADERS = {
    "substructure_counting":
        "These atoms are connected as the following undirected graph to form the molecule:",
    "maximum_triplet_sum":
        "The relationship between them can be described as the following undirected graph:",
    "shortest_path":
        "These wormholes are connected as the following undirected graph:",
    "bipartite_matching":
        "Each applicant is interested in some of the jobs, and the relationship can "
        "be described as the following graph:",
}

APPLICANT_HEADER = "Here are the descriptions of {n} job applicants."
JOB_HEADER = "Here are the descriptions of {n} jobs."


@dataclass(frozen=True)
class GraphTextFormat:
    kind: str = "adjacency_list"  # or "edge_list_random"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("adjacency_list", "edge_list_random"):
            raise ValueError(f"unknown graph text format: {self.kind}")


def _adjacency_lines(instance: TaskInstance) -> list[str]:
    g = instance.graph
    lines = []
    if instance.task == "bipartite_matching":
        half = sum(1 for s in g.partition if s == 0)
        for i in range(half):
            jobs = [f"Job {j - half + 1}" for j in g.neighbors(i)]
            tail = ", ".join(jobs) if jobs else "none"
            lines.append(f"Applicant {i + 1} is interested in: {tail}.")
        return lines
    noun = NOUNS[instance.task]
    for i in range(g.n):
        nbrs = [f"{noun} {j + 1}" for j in g.neighbors(i)]
        tail = ", ".join(nbrs) if nbrs else "none"
        lines.append(f"{noun} {i + 1} is connected with: {tail}.")
    return lines


def _edge_list_lines(instance: TaskInstance, seed: int) -> list[str]:
    g = instance.graph
    edges = g.sorted_edges()
    order = np.random.default_rng(seed).permutation(len(edges))
    lines = []
    for k in order:
        i, j = edges[int(k)]
        if instance.task == "bipartite_matching":
            half = sum(1 for s in g.partition if s == 0)
            lines.append(f"Applicant {i + 1} — Job {j - half + 1}")
        else:
            noun = NOUNS[instance.task]
            lines.append(f"{noun} {i + 1} — {noun} {j + 1}")
    return lines


def _description_lines(instance: TaskInstance) -> list[str]:
    lines = []
    if instance.task == "bipartite_matching":
        half = sum(1 for s in instance.graph.partition if s == 0)
        lines.append(APPLICANT_HEADER.format(n=half))
        for i in range(half):
            lines.append(f"Applicant {i + 1}: {instance.descriptions[i]}")
        lines.append(JOB_HEADER.format(n=instance.graph.n - half))
        for j in range(half, instance.graph.n):
            lines.append(f"Job {j - half + 1}: {instance.descriptions[j]}")
        return lines
    lines.append(DESC_HEADERS[instance.task].format(n=instance.graph.n))
    if instance.task == "shortest_path":
        # wormhole descriptions identify themselves by index
        lines.extend(instance.descriptions)
    else:
        noun = NOUNS[instance.task]
        for i, d in enumerate(instance.descriptions):
            lines.append(f"{noun} {i + 1}: {d}")
    return lines


def serialize_graph(instance: TaskInstance, fmt: GraphTextFormat) -> str:
    """Render the full natural-language input block: node descriptions,
    then structure, then the instruction."""
    lines = _description_lines(instance)
    lines.append(STRUCT_HEADERS[instance.task])
    if fmt.kind == "adjacency_list":
        lines.extend(_adjacency_lines(instance))
    else:
        lines.extend(_edge_list_lines(instance, fmt.seed))
    lines.append(instance.instruction)
    return "\n".join(lines)


def parse_edges(text: str, task: str) -> set[tuple[int, int]]:
    """Recover the 0-based edge set from either serialized structure format."""
    edges: set[tuple[int, int]] = set()
    half = 0
    if task == "bipartite_matching":
        for line in text.split("\n"):
            if line.startswith(APPLICANT_HEADER.split("{")[0]):
                half = int(line.split()[5])
    for line in text.split("\n"):
        if " is connected with: " in line:
            head, tail = line.split(" is connected with: ")
            i = int(head.split()[-1]) - 1
            if tail.rstrip(".") != "none":
                for part in tail.rstrip(".").split(", "):
                    j = int(part.split()[-1]) - 1
                    edges.add((min(i, j), max(i, j)))
        elif " is interested in: " in line:
            head, tail = line.split(" is interested in: ")
            i = int(head.split()[-1]) - 1
            if tail.rstrip(".") != "none":
                for part in tail.rstrip(".").split(", "):
                    j = int(part.split()[-1]) - 1 + half
                    edges.add((i, j))
        elif " — " in line:
            a, b = line.split(" — ")
            i = int(a.split()[-1]) - 1
            j = int(b.split()[-1]) - 1
            if task == "bipartite_matching":
                j += half
            edges.add((min(i, j), max(i, j)))
    return edges


# -- one-shot exemplars ------------------------------------------------------


def _render_all(task: str, attr_slots: list[dict], rng_seed: int,
                template_key: str | None = None) -> tuple[str, ...]:
    rng = np.random.default_rng(rng_seed)
    tpl = templates.TEMPLATES[template_key or task]
    return tuple(templates.render_description(tpl, a, rng) for a in attr_slots)


@lru_cache(maxsize=None)
def exemplar(task: str) -> TaskInstance:
    """A small fixed worked instance for one-shot prompting."""
    if task == "substructure_counting":
        graph = Graph.from_edges(4, [(0, 1), (0, 2), (1, 2), (2, 3)])
        labels = ["C", "C", "O", "N"]
        attrs = []
        for lab, radius, bonds in zip(labels, (75, 70, 65, 70), (4, 4, 2, 3)):
            name, z, mass = templates.ELEMENTS[lab]
            attrs.append({"label": lab, "name": name, "z": z, "mass": mass,
                          "radius": radius, "bonds": bonds})
        descs = _render_all(task, [
            {"symbol": a["label"], **{k: a[k] for k in ("name", "z", "mass", "radius", "bonds")}}
            for a in attrs], rng_seed=11)
        return TaskInstance(task=task, graph=graph, descriptions=descs,
                            attrs=tuple(attrs), anchors=(0,),
                            instruction=templates.instruction_text(task, (0,)),
                            response=templates.response_text(task, 1),
                            answer=1, seed=11)
    if task == "maximum_triplet_sum":
        graph = Graph.from_edges(4, [(0, 1), (1, 2), (1, 3)])
        ages = [40, 60, 25, 70]
        names = ["Ruth Vega", "Oscar Stein", "Clara Boyd", "Felix Novak"]
        attrs = [{"name": nm, "age": ag} for nm, ag in zip(names, ages)]
        descs = _render_all(task, attrs, rng_seed=12)
        return TaskInstance(task=task, graph=graph, descriptions=descs,
                            attrs=tuple(attrs), anchors=(0,),
                            instruction=templates.instruction_text(task, (0,)),
                            response=templates.response_text(task, 170),
                            answer=170, seed=12)
    if task == "shortest_path":
        graph = Graph.from_edges(4, [(0, 1), (0, 2), (1, 3), (2, 3)])
        costs = [20, 40, 10, 20]
        attrs = [{"cost": c, "galaxy": g, "distance": d}
                 for c, g, d in zip(costs,
                                    ("Whirlpool Galaxy", "Crab Nebula",
                                     "Needle Galaxy", "Orion Nebula"),
                                    (5400, 7600, 4200, 3900))]
        descs = _render_all(task, [{"index": i + 1, **a} for i, a in enumerate(attrs)],
                            rng_seed=13)
        return TaskInstance(task=task, graph=graph, descriptions=descs,
                            attrs=tuple(attrs), anchors=(0, 3),
                            instruction=templates.instruction_text(task, (0, 3)),
                            response=templates.response_text(task, 50),
                            answer=50, seed=13)
    if task == "bipartite_matching":
        graph = Graph.from_edges(6, [(0, 3), (1, 3), (1, 4), (2, 5)],
                                 partition=[0, 0, 0, 1, 1, 1])
        attrs = [
            {"kind": "applicant", "name": "Elena Falk", "age": 35, "role": "data analyst"},
            {"kind": "applicant", "name": "Hugo Barnes", "age": 50, "role": "civil engineer"},
            {"kind": "applicant", "name": "Norma Quinn", "age": 45, "role": "school teacher"},
            {"kind": "job", "role": "data analyst", "salary": 52000, "hours": 38},
            {"kind": "job", "role": "civil engineer", "salary": 61000, "hours": 40},
            {"kind": "job", "role": "school teacher", "salary": 47000, "hours": 36},
        ]
        rng = np.random.default_rng(14)
        descs = []
        for a in attrs:
            if a["kind"] == "applicant":
                descs.append(templates.render_description(
                    templates.APPLICANT_TEMPLATE,
                    {k: a[k] for k in ("name", "age", "role")}, rng))
            else:
                descs.append(templates.render_description(
                    templates.JOB_TEMPLATE,
                    {k: a[k] for k in ("role", "salary", "hours")}, rng))
        return TaskInstance(task=task, graph=graph, descriptions=tuple(descs),
                            attrs=tuple(attrs), anchors=(),
                            instruction=templates.instruction_text(task, ()),
                            response=templates.response_text(task, 3),
                            answer=3, seed=14)
    raise ValueError(f"unknown task: {task}")


COT_CHAINS = {
    "substructure_counting":
        "A carbon-carbon-oxygen triangle needs two carbon atoms and one oxygen atom "
        "that are all connected to each other. Atom 1 is carbon, so we check pairs of "
        "its neighbors. Atom 1 is connected with Atom 2 and Atom 3. Atom 2 and Atom 3 "
        "are themselves connected, so Atom 1, Atom 2 and Atom 3 form a triangle, and "
        "their types are carbon, carbon and oxygen, which matches. There is no other "
        "connected pair of neighbors of Atom 1. The number of such triangles is 1.",
    "maximum_triplet_sum":
        "Person 1 is 40 years old. The only friend of Person 1 is Person 2, who is 60 "
        "years old. The friends of Person 2 are Person 1, Person 3 and Person 4, so "
        "the third member of the triplet can be Person 3, who is 25, or Person 4, who "
        "is 70. Taking Person 4 gives the sum of 40, 60 and 70, which is 170, and "
        "that beats the sum of 125 obtained with Person 3. The maximum triplet sum "
        "is 170.",
    "shortest_path":
        "Starting at Wormhole 1 costs 20 pounds of dark matter. One route jumps "
        "through Wormhole 2 and then Wormhole 4, adding 40 and 20 pounds for a total "
        "of 80. Another route jumps through Wormhole 3 and then Wormhole 4, adding 10 "
        "and 20 pounds for a total of 50. The route through Wormhole 3 is cheaper. "
        "The minimum amount of dark matter required is 50.",
    "bipartite_matching":
        "Applicant 1 is only interested in Job 1, so assign Job 1 to Applicant 1. "
        "Applicant 2 is interested in Job 1 and Job 2; Job 1 is taken, so Applicant 2 "
        "takes Job 2. Applicant 3 is interested in Job 3, which is free, so Applicant "
        "3 takes Job 3. Every applicant found a job. The maximum number of matched "
        "applicants is 3.",
}


@dataclass(frozen=True)
class PromptTemplate:
    mode: str  # zero_shot | few_shot | few_shot_cot
    task: str

    def __post_init__(self):
        if self.mode not in ("zero_shot", "few_shot", "few_shot_cot"):
            raise ValueError(f"unknown prompt mode: {self.mode}")


def build_prompt(instance: TaskInstance, template: PromptTemplate,
                 fmt: GraphTextFormat | None = None) -> str:
    fmt = fmt or GraphTextFormat()
    query = serialize_graph(instance, fmt)
    if template.mode == "zero_shot":
        return query
    ex = exemplar(template.task)
    if ex is None:
        raise ValueError(f"no exemplar available for task {template.task}")
    shown = serialize_graph(ex, fmt)
    if template.mode == "few_shot":
        return f"{shown}\n{ex.response}\n\n{query}"
    return f"{shown}\n{COT_CHAINS[template.task]}\n\n{query}"


# -- context accounting ------------------------------------------------------


def count_context_tokens(text: str) -> int:
    """Token count of a prompt under the harness tokenizer (newlines count)."""
    if not text:
        return 0
    return len(split_text(text))


def graph_prefix_context_tokens(instance: TaskInstance, prefix_len: int) -> int:
    """Context charged to the graph-prefix pipeline: the instruction plus
    one slot per prefix position (the serialized graph is never fed in)."""
    return count_context_tokens(instance.instruction) + prefix_len


SCAFFOLD_TEXTS = (
    list(DESC_HEADERS.values())
    + list(STRUCT_HEADERS.values())
    + [APPLICANT_HEADER, JOB_HEADER]
    + list(NOUNS.values())
    + ["Applicant", "Job", "none", "—"]
    + list(COT_CHAINS.values())
)
