"""Exact combinatorial solvers for the four reasoning tasks.

These produce the ground-truth answers baked into generated instances.
Each one is verified in the test suite against an exhaustive brute-force
enumeration on small graphs.
"""

from __future__ import annotations

import heapq

from .graphs import Graph


def oracle_substructure(graph: Graph, labels, anchor: int) -> int:
    """Count triangles through ``anchor`` whose label multiset is {C, C, O}."""
    if not (0 <= anchor < graph.n):
        raise ValueError(f"anchor {anchor} out of range")
    nbrs = graph.neighbors(anchor)
    edges = graph.edges
    count = 0
    for a in range(len(nbrs)):
        for b in range(a + 1, len(nbrs)):
            j, k = nbrs[a], nbrs[b]
            if (min(j, k), max(j, k)) not in edges:
                continue
            trio = sorted((labels[anchor], labels[j], labels[k]))
            if trio == ["C", "C", "O"]:
                count += 1
    return count


def oracle_triplet_sum(graph: Graph, ages, anchor: int) -> int:
    """Maximum of ages[v] + ages[f] + ages[g] over pairwise-distinct
    (v, f, g) with v = anchor, f a neighbor of v, g a neighbor of f."""
    if not (0 <= anchor < graph.n):
        raise ValueError(f"anchor {anchor} out of range")
    best = -1
    for f in graph.neighbors(anchor):
        for g in graph.neighbors(f):
            if g == anchor or g == f:
                continue
            best = max(best, ages[anchor] + ages[f] + ages[g])
    if best < 0:
        raise ValueError(f"no valid triplet exists for anchor {anchor}")
    return best


def oracle_shortest_path(graph: Graph, costs, source: int, target: int) -> int:
    """Minimum total node cost over source->target paths, both endpoints
    included.  Dijkstra relaxation over node weights; positive costs make
    the optimum a simple path."""
    if not (0 <= source < graph.n and 0 <= target < graph.n):
        raise ValueError("source/target out of range")
    adj: list[list[int]] = [[] for _ in range(graph.n)]
    for (i, j) in graph.edges:
        adj[i].append(j)
        adj[j].append(i)
    inf = float("inf")
    dist = [inf] * graph.n
    dist[source] = costs[source]
    heap: list[tuple[float, int]] = [(dist[source], source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u == target:
            break
        for v in adj[u]:
            nd = d + costs[v]
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    if dist[target] == inf:
        raise ValueError(f"target {target} unreachable from source {source}")
    return int(dist[target])


def oracle_bipartite_matching(graph: Graph) -> int:
    """Maximum matching size via augmenting paths (Kuhn's algorithm)."""
    if graph.partition is None:
        raise ValueError("bipartite matching requires a partition")
    left = [i for i in range(graph.n) if graph.partition[i] == 0]
    adj: dict[int, list[int]] = {i: graph.neighbors(i) for i in left}
    match_right: dict[int, int] = {}

    def try_augment(u: int, seen: set[int]) -> bool:
        for v in adj[u]:
            if v in seen:
                continue
            seen.add(v)
            if v not in match_right or try_augment(match_right[v], seen):
                match_right[v] = u
                return True
        return False

    size = 0
    for u in left:
        if try_augment(u, set()):
            size += 1
    return size
