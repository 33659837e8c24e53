"""Undirected graphs, DAGs and the separation queries built on them.

Nodes are 0-based integers inside the library. The edge-list text format
(:func:`read_edge_list`, :func:`write_edge_list`) is 1-based.
"""
from __future__ import annotations

import heapq
import itertools
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, StructureError


def _norm_edge(i: int, j: int) -> tuple[int, int]:
    return (i, j) if i < j else (j, i)


@dataclass(frozen=True)
class UndirectedGraph:
    num_nodes: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        d = int(self.num_nodes)
        if d < 1:
            raise StructureError("graph needs at least one node")
        norm = set()
        for e in self.edges:
            i, j = (int(v) for v in e)
            if i == j:
                raise StructureError(f"self-loop at node {i}")
            if not (0 <= i < d and 0 <= j < d):
                raise StructureError(f"edge ({i}, {j}) out of range for {d} nodes")
            norm.add(_norm_edge(i, j))
        object.__setattr__(self, "num_nodes", d)
        object.__setattr__(self, "edges", frozenset(norm))
        adj = [set() for _ in range(d)]
        for i, j in norm:
            adj[i].add(j)
            adj[j].add(i)
        object.__setattr__(self, "_adj", tuple(frozenset(a) for a in adj))

    @classmethod
    def complete(cls, d: int) -> "UndirectedGraph":
        return cls(d, frozenset(itertools.combinations(range(d), 2)))

    @classmethod
    def from_adjacency(cls, A) -> "UndirectedGraph":
        A = np.asarray(A)
        d = A.shape[0]
        return cls(d, frozenset((i, j) for i in range(d) for j in range(i + 1, d) if A[i, j] or A[j, i]))

    def neighbors(self, i: int) -> frozenset:
        return self._adj[i]

    def has_edge(self, i: int, j: int) -> bool:
        return _norm_edge(i, j) in self.edges

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.num_nodes, self.num_nodes), dtype=bool)
        for i, j in self.edges:
            A[i, j] = A[j, i] = True
        return A

    def components(self) -> list[list[int]]:
        seen = [False] * self.num_nodes
        comps = []
        for s in range(self.num_nodes):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [s], deque([s])
            while queue:
                u = queue.popleft()
                for v in self._adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        comp.append(v)
                        queue.append(v)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def is_tree(self) -> bool:
        return self.n_edges == self.num_nodes - 1 and self.is_connected()

    def __repr__(self):
        return f"UndirectedGraph(d={self.num_nodes}, edges={self.sorted_edges()})"


@dataclass(frozen=True)
class Dag:
    num_nodes: int
    arcs: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        d = int(self.num_nodes)
        if d < 1:
            raise StructureError("graph needs at least one node")
        arcs = set()
        for a in self.arcs:
            i, j = (int(v) for v in a)
            if i == j:
                raise StructureError(f"self-loop at node {i}")
            if not (0 <= i < d and 0 <= j < d):
                raise StructureError(f"arc ({i}, {j}) out of range for {d} nodes")
            arcs.add((i, j))
        object.__setattr__(self, "num_nodes", d)
        object.__setattr__(self, "arcs", frozenset(arcs))
        parents = [set() for _ in range(d)]
        children = [set() for _ in range(d)]
        for i, j in arcs:
            children[i].add(j)
            parents[j].add(i)
        object.__setattr__(self, "_pa", tuple(frozenset(p) for p in parents))
        object.__setattr__(self, "_ch", tuple(frozenset(c) for c in children))
        object.__setattr__(self, "_topo", self._toposort())

    def _toposort(self) -> tuple[int, ...]:
        indeg = [len(p) for p in self._pa]
        heap = [i for i in range(self.num_nodes) if indeg[i] == 0]
        heapq.heapify(heap)
        order = []
        while heap:
            u = heapq.heappop(heap)
            order.append(u)
            for v in self._ch[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    heapq.heappush(heap, v)
        if len(order) != self.num_nodes:
            raise StructureError("arcs contain a directed cycle")
        return tuple(order)

    def parents(self, i: int) -> frozenset:
        return self._pa[i]

    def children(self, i: int) -> frozenset:
        return self._ch[i]

    def topological_order(self) -> tuple[int, ...]:
        return self._topo

    def descendants(self, i: int) -> set[int]:
        """Nodes reachable from ``i`` by a directed path (excluding ``i``)."""
        out, stack = set(), [i]
        while stack:
            for v in self._ch[stack.pop()]:
                if v not in out:
                    out.add(v)
                    stack.append(v)
        return out

    def ancestors(self, nodes: Iterable[int]) -> set[int]:
        """``nodes`` together with all their ancestors."""
        out = set(nodes)
        stack = list(out)
        while stack:
            for p in self._pa[stack.pop()]:
                if p not in out:
                    out.add(p)
                    stack.append(p)
        return out

    def skeleton(self) -> UndirectedGraph:
        return UndirectedGraph(self.num_nodes, frozenset(_norm_edge(i, j) for i, j in self.arcs))

    def __repr__(self):
        return f"Dag(d={self.num_nodes}, arcs={sorted(self.arcs)})"


# ---------------------------------------------------------------- separation

def _check_sets(d: int, A, B, C) -> tuple[set, set, set]:
    A, B, C = set(A), set(B), set(C)
    if not A or not B:
        raise ValueError("A and B must be nonempty")
    if A & B or A & C or B & C:
        raise ValueError("A, B and C must be pairwise disjoint")
    for v in A | B | C:
        if not 0 <= v < d:
            raise ValueError(f"node {v} out of range")
    return A, B, C


def separates(G: UndirectedGraph, A, B, C=()) -> bool:
    """True iff every path between ``A`` and ``B`` in ``G`` meets ``C``."""
    A, B, C = _check_sets(G.num_nodes, A, B, C)
    seen = set(A)
    queue = deque(A)
    while queue:
        u = queue.popleft()
        for v in G.neighbors(u):
            if v in B:
                return False
            if v not in seen and v not in C:
                seen.add(v)
                queue.append(v)
    return True


def d_separates(D: Dag, A, B, C=()) -> bool:
    """Pearl's d-separation of ``A`` and ``B`` given ``C``.

    Uses the reachability ("Bayes ball") traversal over (node, direction)
    states: a trail passes a chain or fork node only if it is outside ``C``,
    and a collider only if it or one of its descendants is in ``C``.
    """
    A, B, C = _check_sets(D.num_nodes, A, B, C)
    # nodes whose descendant set (including themselves) meets C
    an_C = D.ancestors(C)
    UP, DOWN = 0, 1  # arrived from a child / from a parent
    visited = set()
    stack = [(a, UP) for a in A]
    while stack:
        v, direction = stack.pop()
        if (v, direction) in visited:
            continue
        visited.add((v, direction))
        if v in B:
            return False
        if direction == UP:
            if v not in C:
                stack.extend((p, UP) for p in D.parents(v))
                stack.extend((c, DOWN) for c in D.children(v))
        else:
            if v not in C:
                stack.extend((c, DOWN) for c in D.children(v))
            if v in an_C:
                stack.extend((p, UP) for p in D.parents(v))
    return True


def moralized_skeleton(D: Dag) -> UndirectedGraph:
    """Skeleton of ``D`` plus an edge between every pair of co-parents."""
    edges = {_norm_edge(i, j) for i, j in D.arcs}
    for v in range(D.num_nodes):
        for p, q in itertools.combinations(sorted(D.parents(v)), 2):
            edges.add((p, q))
    return UndirectedGraph(D.num_nodes, frozenset(edges))


def ancestral_subgraph(D: Dag, nodes) -> Dag:
    """Restriction of ``D`` to the ancestral closure of ``nodes``.

    Node labels are kept; nodes outside the closure become isolated.
    """
    keep = D.ancestors(nodes)
    return Dag(D.num_nodes, frozenset((i, j) for i, j in D.arcs if i in keep and j in keep))


def moral_separates(D: Dag, A, B, C=()) -> bool:
    """d-separation computed by undirected separation in the moralized
    ancestral graph of ``A | B | C``."""
    A, B, C = _check_sets(D.num_nodes, A, B, C)
    M = moralized_skeleton(ancestral_subgraph(D, A | B | C))
    return separates(M, A, B, C)


# ---------------------------------------------------------------- trees

class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def weights_from_matrix(W) -> list[tuple[int, int, float]]:
    W = np.asarray(W, dtype=float)
    d = W.shape[0]
    return [(i, j, float(W[i, j])) for i in range(d) for j in range(i + 1, d)]


def minimum_spanning_tree(weights, d: int | None = None) -> UndirectedGraph:
    """Kruskal's algorithm.

    ``weights`` is a list of ``(i, j, w)`` triples or a symmetric d x d matrix.
    Infinite weights mark absent edges. Ties are broken by ``(i, j)`` order.
    """
    if not isinstance(weights, (list, tuple)):
        W = np.asarray(weights, dtype=float)
        d = W.shape[0] if d is None else d
        weights = weights_from_matrix(W)
    if d is None:
        raise ValueError("number of nodes required with an edge list")
    cand = []
    for i, j, w in weights:
        if np.isnan(w) or w < 0:
            raise DataError(f"invalid weight {w} on edge ({i}, {j})")
        if np.isfinite(w):
            i, j = _norm_edge(int(i), int(j))
            cand.append((float(w), i, j))
    cand.sort()
    uf = _UnionFind(d)
    chosen = []
    for w, i, j in cand:
        if uf.union(i, j):
            chosen.append((i, j))
            if len(chosen) == d - 1:
                break
    if len(chosen) != d - 1:
        raise StructureError("weight graph is disconnected; no spanning tree exists")
    return UndirectedGraph(d, frozenset(chosen))


def unique_tree_path(T: UndirectedGraph, i: int, j: int) -> list[tuple[int, int]]:
    """Edges, in walking order, of the unique path from ``i`` to ``j`` in tree ``T``."""
    if not T.is_tree():
        raise StructureError("graph is not a tree")
    return _bfs_path(T, i, j)


def _bfs_path(G: UndirectedGraph, i: int, j: int) -> list[tuple[int, int]]:
    if i == j:
        return []
    prev = {i: None}
    queue = deque([i])
    while queue:
        u = queue.popleft()
        if u == j:
            break
        for v in sorted(G.neighbors(u)):
            if v not in prev:
                prev[v] = u
                queue.append(v)
    if j not in prev:
        raise StructureError(f"no path between {i} and {j}")
    nodes = [j]
    while nodes[-1] != i:
        nodes.append(prev[nodes[-1]])
    nodes.reverse()
    return list(zip(nodes[:-1], nodes[1:]))


def shortest_path(G: UndirectedGraph, i: int, j: int) -> list[tuple[int, int]]:
    return _bfs_path(G, i, j)


def directed_paths(D: Dag, j: int, i: int) -> list[list[tuple[int, int]]]:
    """All directed paths from ``j`` to ``i`` as lists of arcs; empty if ``i == j``."""
    if i == j:
        return []
    paths = []

    def walk(u, acc):
        for v in sorted(D.children(u)):
            step = acc + [(u, v)]
            if v == i:
                paths.append(step)
            else:
                walk(v, step)

    walk(j, [])
    return paths


# ---------------------------------------------------------------- chordality

def maximum_cardinality_search(G: UndirectedGraph, start: int = 0) -> list[int]:
    """Visit order of maximum cardinality search (ties to the smallest label)."""
    d = G.num_nodes
    weight = [0] * d
    visited = [False] * d
    order = []
    for step in range(d):
        if step == 0:
            u = start
        else:
            best = max(weight[v] for v in range(d) if not visited[v])
            u = min(v for v in range(d) if not visited[v] and weight[v] == best)
        visited[u] = True
        order.append(u)
        for v in G.neighbors(u):
            if not visited[v]:
                weight[v] += 1
    return order


def is_decomposable(G: UndirectedGraph) -> tuple[bool, list[int] | None]:
    """Chordality test.

    Returns ``(True, peo)`` with a perfect elimination ordering when ``G`` is
    decomposable, ``(False, None)`` otherwise.
    """
    peo = maximum_cardinality_search(G)[::-1]
    pos = {v: k for k, v in enumerate(peo)}
    for v in peo:
        later = [u for u in G.neighbors(v) if pos[u] > pos[v]]
        if not later:
            continue
        first = min(later, key=pos.__getitem__)
        rest = set(later) - {first}
        if not rest <= (G.neighbors(first) | {first}):
            return False, None
    return True, peo


def cliques(G: UndirectedGraph) -> list[tuple[int, ...]]:
    """All maximal cliques, each sorted, in lexicographic order (Bron-Kerbosch with pivoting)."""
    out = []

    def expand(R, P, X):
        if not P and not X:
            out.append(tuple(sorted(R)))
            return
        pivot = max(P | X, key=lambda u: len(P & G.neighbors(u)))
        for v in sorted(P - G.neighbors(pivot)):
            nb = G.neighbors(v)
            expand(R | {v}, P & nb, X & nb)
            P = P - {v}
            X = X | {v}

    expand(set(), set(range(G.num_nodes)), set())
    return sorted(out)


def junction_order(G: UndirectedGraph, root: int = 0) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Cliques of a connected decomposable graph in a running-intersection order.

    Returns ``[(clique, separator), ...]``; the first separator is empty and
    every later separator is the clique's intersection with the union of the
    earlier cliques. ``root`` selects the starting clique, so different roots
    yield different valid orders.
    """
    ok, _ = is_decomposable(G)
    if not ok:
        raise StructureError("graph is not decomposable")
    if not G.is_connected():
        raise StructureError("graph is not connected")
    cl = cliques(G)
    m = len(cl)
    sets = [set(c) for c in cl]
    # maximum-weight spanning tree of the clique graph is a junction tree
    cand = sorted(
        ((-len(sets[a] & sets[b]), a, b) for a in range(m) for b in range(a + 1, m) if sets[a] & sets[b])
    )
    uf = _UnionFind(m)
    nbrs = [[] for _ in range(m)]
    for _, a, b in cand:
        if uf.union(a, b):
            nbrs[a].append(b)
            nbrs[b].append(a)
    root %= m
    order, seen = [], {root}
    queue = deque([(root, None)])
    while queue:
        c, parent = queue.popleft()
        sep = () if parent is None else tuple(sorted(sets[c] & sets[parent]))
        order.append((cl[c], sep))
        for nb in sorted(nbrs[c]):
            if nb not in seen:
                seen.add(nb)
                queue.append((nb, c))
    return order


def is_block_graph(G: UndirectedGraph) -> bool:
    """Connected decomposable graph whose separators are single nodes."""
    if not G.is_connected():
        return False
    ok, _ = is_decomposable(G)
    if not ok:
        return False
    return all(len(sep) <= 1 for _, sep in junction_order(G))


# ---------------------------------------------------------------- edge lists

def read_edge_list(source, num_nodes: int | None = None):
    """Parse the 1-based edge-list format.

    One edge per line: ``i j`` (undirected) or ``i -> j`` (directed); ``#``
    starts a comment. A ``# nodes: d`` comment fixes the node count, which
    otherwise defaults to the largest index seen. Returns an
    :class:`UndirectedGraph` or a :class:`Dag`.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).exists()):
        text = Path(source).read_text()
    else:
        text = str(source)
    edges, arcs = [], []
    header_d = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith("#"):
            body = line[1:].strip().lower()
            if body.startswith("nodes:"):
                header_d = int(body.split(":", 1)[1])
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            if "->" in line:
                a, b = line.split("->")
                arcs.append((int(a) - 1, int(b) - 1))
            else:
                a, b = line.split()
                edges.append((int(a) - 1, int(b) - 1))
        except ValueError as exc:
            raise DataError(f"line {lineno}: cannot parse edge {raw!r}") from exc
    if edges and arcs:
        raise DataError("edge list mixes directed and undirected edges")
    d = num_nodes or header_d
    if d is None:
        d = 1 + max((max(e) for e in edges + arcs), default=0)
    if min((min(e) for e in edges + arcs), default=0) < 0:
        raise DataError("node indices are 1-based")
    if arcs:
        return Dag(d, frozenset(arcs))
    return UndirectedGraph(d, frozenset(edges))


def format_edge_list(G) -> str:
    lines = [f"# nodes: {G.num_nodes}"]
    if isinstance(G, Dag):
        lines += [f"{i + 1} -> {j + 1}" for i, j in sorted(G.arcs)]
    else:
        lines += [f"{i + 1} {j + 1}" for i, j in G.sorted_edges()]
    return "\n".join(lines) + "\n"


def write_edge_list(G, path) -> None:
    Path(path).write_text(format_edge_list(G))


def graph_from_edges(d: int, edges: Sequence[tuple[int, int]], one_based: bool = False) -> UndirectedGraph:
    off = 1 if one_based else 0
    return UndirectedGraph(d, frozenset((i - off, j - off) for i, j in edges))
