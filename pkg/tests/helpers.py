"""Shared reference matrices and graphs (0-based indices)."""
import numpy as np

from xgraph.completion import laplacian, laplacian_pinv
from xgraph.graphs import Dag, UndirectedGraph
from xgraph.hr import sigma_to_gamma

# five-node example with a worked completion; NaN marks the unknown entries
FIVE_EDGES = [(0, 1), (0, 2), (1, 2), (0, 3), (2, 3), (3, 4)]
FIVE_GAMMA = np.array([
    [0, 10, 4, 3, 9],
    [10, 0, 18, 15, 21],
    [4, 18, 0, 3, 9],
    [3, 15, 3, 0, 6],
    [9, 21, 9, 6, 0],
], dtype=float)
FIVE_PARTIAL = FIVE_GAMMA.copy()
for _i, _j in [(0, 4), (1, 3), (1, 4), (2, 4)]:
    FIVE_PARTIAL[_i, _j] = FIVE_PARTIAL[_j, _i] = np.nan

# six-node block graph with cliques {1,2,3}, {3,4,5}, {4,6}
BLOCK6_EDGES = [(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4), (3, 5)]
BLOCK6_GAMMA = np.array([
    [0, 6, 6, 12, 10, 22],
    [6, 0, 4, 10, 8, 20],
    [6, 4, 0, 6, 4, 16],
    [12, 10, 6, 0, 10, 10],
    [10, 8, 4, 10, 0, 20],
    [22, 20, 16, 10, 20, 0],
], dtype=float)
BLOCK6_NON_EDGES = [(0, 3), (0, 4), (0, 5), (1, 3), (1, 4), (1, 5), (2, 5), (4, 5)]

# moderate-dependence model on the five-node graph used for simulations
SIM_GAMMA = FIVE_GAMMA / 15

# EMTP2 model on the same graph: a Laplacian with positive edge weights
EMTP2_WEIGHTS = np.array([2.0, 1.5, 1.0, 2.5, 1.5, 2.0])


def five_graph() -> UndirectedGraph:
    return UndirectedGraph(5, frozenset(FIVE_EDGES))


def block6_graph() -> UndirectedGraph:
    return UndirectedGraph(6, frozenset(BLOCK6_EDGES))


def emtp2_gamma() -> np.ndarray:
    ei = np.array([e[0] for e in FIVE_EDGES])
    ej = np.array([e[1] for e in FIVE_EDGES])
    return sigma_to_gamma(laplacian_pinv(laplacian(5, ei, ej, EMTP2_WEIGHTS)))


def diamond_dag() -> Dag:
    # 1 -> 2, 1 -> 4, 2 -> 3, 4 -> 3
    return Dag(4, frozenset({(0, 1), (0, 3), (1, 2), (3, 2)}))


def cassiopeia_dag() -> Dag:
    # 1 -> 4, 2 -> 4, 2 -> 5, 3 -> 5
    return Dag(5, frozenset({(0, 3), (1, 3), (1, 4), (2, 4)}))


def four_cycle() -> UndirectedGraph:
    return UndirectedGraph(4, frozenset({(0, 1), (1, 2), (2, 3), (0, 3)}))


def path_tree_gamma(d: int = 4, weight: float = 1.0) -> np.ndarray:
    idx = np.arange(d)
    return weight * np.abs(idx[:, None] - idx[None, :]).astype(float)


def random_variogram(rng, d: int) -> np.ndarray:
    """Valid variogram from a random positive definite covariance."""
    A = rng.normal(size=(d, d))
    S = A @ A.T / d + 0.1 * np.eye(d)
    return sigma_to_gamma(S)


def tree_gamma(d: int, edges, weights) -> np.ndarray:
    """Path-sum variogram of a weighted tree (independent of the library's path code)."""
    adj = {i: [] for i in range(d)}
    for (a, b), w in zip(edges, weights):
        adj[a].append((b, w))
        adj[b].append((a, w))
    G = np.zeros((d, d))
    for s in range(d):
        stack, seen = [(s, 0.0)], {s}
        while stack:
            u, dist = stack.pop()
            G[s, u] = dist
            for v, w in adj[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append((v, dist + w))
    return G


def random_tree(rng, d: int) -> list[tuple[int, int]]:
    perm = rng.permutation(d)
    edges = []
    for pos in range(1, d):
        a, b = sorted((int(perm[pos]), int(perm[rng.integers(0, pos)])))
        edges.append((a, b))
    return edges
