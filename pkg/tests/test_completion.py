import time

import numpy as np
import pytest

from helpers import (
    BLOCK6_EDGES,
    BLOCK6_GAMMA,
    BLOCK6_NON_EDGES,
    FIVE_GAMMA,
    FIVE_PARTIAL,
    block6_graph,
    five_graph,
    four_cycle,
    random_tree,
    random_variogram,
    tree_gamma,
)
from xgraph.completion import (
    PartialVariogram,
    complete_decomposable,
    complete_gamma,
    complete_tree_blockgraph,
    laplacian,
    laplacian_pinv,
)
from xgraph.errors import DataError, InvalidVariogramError, StructureError
from xgraph.graphs import UndirectedGraph, is_decomposable
from xgraph.hr import gamma_to_theta, is_valid_variogram, sigma_to_gamma


def _assert_graph_structured(model, tol=1e-6):
    G = model.graph
    T = gamma_to_theta(model.Gamma)
    for i in range(G.num_nodes):
        for j in range(i + 1, G.num_nodes):
            if not G.has_edge(i, j):
                assert abs(T[i, j]) < tol * np.abs(T).max()


@pytest.mark.parametrize("method", ["auto", "decomposable", "iterative"])
def test_five_node_completion(method):
    model = complete_gamma(PartialVariogram(five_graph(), FIVE_PARTIAL), method=method)
    np.testing.assert_allclose(model.Gamma, FIVE_GAMMA, atol=1e-6)
    _assert_graph_structured(model)
    assert model.Gamma[1, 3] == pytest.approx(15, abs=1e-6)


def test_five_node_completion_is_fast():
    pv = PartialVariogram(five_graph(), FIVE_PARTIAL)
    t0 = time.perf_counter()
    complete_gamma(pv)
    assert time.perf_counter() - t0 < 0.1


def test_block_graph_example():
    pv = PartialVariogram.from_full(block6_graph(), BLOCK6_GAMMA)
    path = complete_tree_blockgraph(pv)
    full = complete_gamma(pv).Gamma
    for i, j in BLOCK6_NON_EDGES:
        assert path[i, j] == pytest.approx(BLOCK6_GAMMA[i, j], abs=1e-10)
        assert full[i, j] == pytest.approx(BLOCK6_GAMMA[i, j], abs=1e-8)
    assert path[0, 5] == 22 and path[1, 4] == 8
    for i, j in BLOCK6_EDGES:
        assert path[i, j] == BLOCK6_GAMMA[i, j]


def test_complete_graph_unchanged():
    G = random_variogram(np.random.default_rng(0), 5)
    full = UndirectedGraph.complete(5)
    np.testing.assert_allclose(complete_gamma(PartialVariogram.from_full(full, G)).Gamma, G, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_tree_completion_matches_path_sums(seed):
    rng = np.random.default_rng(seed)
    d = 7
    edges = random_tree(rng, d)
    weights = rng.uniform(0.5, 2.0, size=d - 1)
    expected = tree_gamma(d, edges, weights)
    pv = PartialVariogram.from_full(UndirectedGraph(d, frozenset(edges)), expected)
    np.testing.assert_allclose(complete_tree_blockgraph(pv), expected, atol=1e-10)
    np.testing.assert_allclose(complete_gamma(pv).Gamma, expected, atol=1e-6)
    np.testing.assert_allclose(complete_gamma(pv, method="iterative").Gamma, expected, atol=1e-6)


def test_junction_roots_agree():
    pv = PartialVariogram(five_graph(), FIVE_PARTIAL)
    a = complete_decomposable(pv, root=0)
    b = complete_decomposable(pv, root=4)
    np.testing.assert_allclose(a, b, atol=1e-8)


def _graph_model(G, seed):
    # a Laplacian precision on the edges of G gives a graph-structured variogram
    rng = np.random.default_rng(seed)
    edges = G.sorted_edges()
    ei = np.array([e[0] for e in edges])
    ej = np.array([e[1] for e in edges])
    w = rng.uniform(0.5, 2.0, size=len(edges))
    return sigma_to_gamma(laplacian_pinv(laplacian(G.num_nodes, ei, ej, w)))


@pytest.mark.parametrize("seed", range(3))
def test_non_decomposable_cycle(seed):
    C = four_cycle()
    assert not is_decomposable(C)[0]
    truth = _graph_model(C, seed)
    model = complete_gamma(PartialVariogram.from_full(C, truth))
    assert model.method == "completion-iterative"
    np.testing.assert_allclose(model.Gamma, truth, atol=1e-6)
    _assert_graph_structured(model)


def test_non_decomposable_larger_graph():
    d = 8
    edges = {(i, (i + 1) % d) for i in range(d)} | {(0, 4), (2, 6)}
    G = UndirectedGraph(d, frozenset(edges))
    truth = _graph_model(G, 7)
    model = complete_gamma(PartialVariogram.from_full(G, truth))
    np.testing.assert_allclose(model.Gamma, truth, atol=1e-6)
    assert is_valid_variogram(model.Gamma)
    assert model.info["residual"] < 1e-8


def test_fitted_theta_zero_off_graph():
    model = complete_gamma(PartialVariogram(five_graph(), FIVE_PARTIAL))
    for i, j in [(0, 4), (1, 3), (1, 4), (2, 4)]:
        assert model.Theta[i, j] == 0.0
    np.testing.assert_allclose(model.Theta, gamma_to_theta(model.Gamma), atol=1e-7)


def test_completion_errors():
    disconnected = UndirectedGraph(3, frozenset({(0, 1)}))
    with pytest.raises(StructureError):
        complete_gamma(PartialVariogram(disconnected, np.array([[0, 1, np.nan], [1, 0, np.nan], [np.nan] * 3])))
    with pytest.raises(DataError):
        PartialVariogram(five_graph(), np.full((5, 5), np.nan))
    with pytest.raises(DataError):
        PartialVariogram(five_graph(), np.zeros((4, 4)))
    bad = FIVE_PARTIAL.copy()
    bad[1, 2] = bad[2, 1] = 30.0  # clique {1,2,3} violates negative definiteness
    with pytest.raises(InvalidVariogramError):
        complete_gamma(PartialVariogram(five_graph(), bad))
    with pytest.raises(StructureError):
        complete_tree_blockgraph(PartialVariogram.from_full(four_cycle(), _graph_model(four_cycle(), 0)))
    with pytest.raises(ValueError):
        complete_gamma(PartialVariogram(five_graph(), FIVE_PARTIAL), method="magic")
