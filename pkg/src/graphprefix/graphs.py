"""Undirected graphs and their random-walk linear algebra.

Edges are stored canonically as (i, j) pairs with i < j.  Bipartite
instances carry an optional per-node side label; every edge must cross
the partition.  All functions here are pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Graph:
    n: int
    edges: frozenset[tuple[int, int]]
    partition: tuple[int, ...] | None = None

    def __post_init__(self):
        for (i, j) in self.edges:
            if not (0 <= i < j < self.n):
                raise ValueError(f"edge ({i}, {j}) not canonical for n={self.n}")
            if self.partition is not None and self.partition[i] == self.partition[j]:
                raise ValueError(f"edge ({i}, {j}) does not cross the partition")
        if self.partition is not None and len(self.partition) != self.n:
            raise ValueError("partition length must equal node count")

    @staticmethod
    def from_edges(n: int, edges, partition=None) -> "Graph":
        canon = frozenset((min(i, j), max(i, j)) for (i, j) in edges)
        for (i, j) in canon:
            if i == j:
                raise ValueError(f"self-loop at node {i}")
        part = tuple(partition) if partition is not None else None
        return Graph(n=n, edges=canon, partition=part)

    def neighbors(self, i: int) -> list[int]:
        out = []
        for (a, b) in self.edges:
            if a == i:
                out.append(b)
            elif b == i:
                out.append(a)
        return sorted(out)

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.float64)
        for (i, j) in self.edges:
            a[i, j] = 1.0
            a[j, i] = 1.0
        return a

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def random_walk_matrix(graph: Graph) -> np.ndarray:
    """Degree-normalized adjacency: row i is 1/deg(i) on neighbors of i.
    Rows of isolated nodes are all-zero (degree-0 convention)."""
    a = graph.adjacency()
    deg = a.sum(axis=1)
    m = np.zeros_like(a)
    nz = deg > 0
    m[nz] = a[nz] / deg[nz, None]
    return m


def rrwp_raw(graph: Graph, walk_len: int) -> np.ndarray:
    """Stack of walk matrices [I, M, M^2, ..., M^(walk_len-1)] as an
    n x n x walk_len array of relative random walk probabilities."""
    if walk_len < 1:
        raise ValueError(f"walk_len must be >= 1, got {walk_len}")
    n = graph.n
    m = random_walk_matrix(graph)
    out = np.zeros((n, n, walk_len), dtype=np.float64)
    power = np.eye(n, dtype=np.float64)
    for k in range(walk_len):
        out[:, :, k] = power
        if k + 1 < walk_len:
            power = power @ m
    return out


def permute(graph: Graph, perm) -> Graph:
    """Relabel nodes: edge (i, j) maps to (perm[i], perm[j])."""
    perm = list(perm)
    if sorted(perm) != list(range(graph.n)):
        raise ValueError(f"perm is not a bijection on 0..{graph.n - 1}")
    edges = [(perm[i], perm[j]) for (i, j) in graph.edges]
    part = None
    if graph.partition is not None:
        part = [0] * graph.n
        for i, side in enumerate(graph.partition):
            part[perm[i]] = side
    return Graph.from_edges(graph.n, edges, part)


def is_connected(graph: Graph) -> bool:
    if graph.n == 0:
        return True
    adj: list[list[int]] = [[] for _ in range(graph.n)]
    for (i, j) in graph.edges:
        adj[i].append(j)
        adj[j].append(i)
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == graph.n
