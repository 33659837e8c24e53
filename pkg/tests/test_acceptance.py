"""Acceptance suite: one test per criterion, at the stated tolerances."""
import itertools
import time

import numpy as np
import pytest
from scipy import integrate, stats

from helpers import (
    BLOCK6_EDGES,
    BLOCK6_GAMMA,
    BLOCK6_NON_EDGES,
    FIVE_GAMMA,
    FIVE_PARTIAL,
    SIM_GAMMA,
    cassiopeia_dag,
    emtp2_gamma,
    diamond_dag,
    block6_graph,
    five_graph,
    four_cycle,
    random_tree,
    random_variogram,
    tree_gamma,
)
from xgraph.completion import PartialVariogram, complete_gamma, complete_tree_blockgraph, laplacian, laplacian_pinv
from xgraph.estimators import EstimatorConfig, emp_vario_joint, evaluate_loglik
from xgraph.graphs import Dag, UndirectedGraph, d_separates, directed_paths, moral_separates, separates
from xgraph.hr import chi_from_gamma_entry, check_metric_property, gamma_to_theta, precision_issues, \
    sigma_to_gamma, surrogate_loglik, theta_to_gamma
from xgraph.simulation import (
    RecursiveMLSpec,
    ml_coefficients,
    sample_hr_pareto,
    sample_max_linear,
    sample_recursive_max_linear,
)
from xgraph.structure import default_grid, eglearn_path, emst, emtp2_fit

pytestmark = pytest.mark.slow

CFG = EstimatorConfig(0.95)


def test_criterion_01_five_node_completion():
    pv = PartialVariogram(five_graph(), FIVE_PARTIAL)
    t0 = time.perf_counter()
    G = complete_gamma(pv).Gamma
    elapsed = time.perf_counter() - t0
    for (i, j), val in {(0, 4): 9, (1, 3): 15, (1, 4): 21, (2, 4): 9}.items():
        assert abs(G[i, j] - val) <= 1e-6
    assert elapsed < 0.1


def test_criterion_02_block_graph_completion():
    pv = PartialVariogram.from_full(block6_graph(), BLOCK6_GAMMA)
    t0 = time.perf_counter()
    G = complete_tree_blockgraph(pv)
    elapsed = time.perf_counter() - t0
    for i, j in BLOCK6_NON_EDGES:
        assert abs(G[i, j] - BLOCK6_GAMMA[i, j]) <= 1e-10
    assert G[0, 5] == 22 and G[1, 4] == 8
    for i, j in BLOCK6_EDGES:
        assert G[i, j] == BLOCK6_GAMMA[i, j]
    assert elapsed < 0.1


def test_criterion_03_round_trip():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(3, 31))
        G = random_variogram(rng, d)
        T = gamma_to_theta(G)
        assert precision_issues(T) == []
        assert np.abs(T.sum(axis=1)).max() <= 1e-8
        w = np.linalg.eigvalsh(T)
        assert w[0] >= -1e-8 * w[-1] and np.sum(w > 1e-8 * w[-1]) == d - 1
        worst = max(worst, np.abs(theta_to_gamma(T) - G).max())
    assert worst <= 1e-7
    assert time.perf_counter() - t0 < 30


def test_criterion_04_sampler_chi():
    analytic = float(chi_from_gamma_entry(8.0))
    z = stats.norm(-4.0, np.sqrt(8.0))
    quad, _ = integrate.quad(lambda y: y**-2 * z.sf(-np.log(y)), 1, np.inf, epsabs=1e-13)
    assert abs(quad - analytic) < 1e-9 and round(analytic, 4) == 0.1573
    t0 = time.perf_counter()
    Y = sample_hr_pareto(np.array([[0.0, 8.0], [8.0, 0.0]]), 1_000_000, seed=4)
    exc = Y[:, 0] > 1
    chi_hat = np.mean(Y[exc, 1] > 1)
    assert abs(chi_hat - analytic) <= 0.01
    assert time.perf_counter() - t0 < 60


def test_criterion_05_estimator_consistency():
    t0 = time.perf_counter()
    ok = 0
    for seed in range(20):
        Gh = emp_vario_joint(sample_hr_pareto(SIM_GAMMA, 100_000, seed=seed), CFG)
        ok += np.abs(Gh - SIM_GAMMA).max() <= 0.15
    assert ok >= 18
    assert time.perf_counter() - t0 < 300


def test_criterion_06_tree_recovery():
    t0 = time.perf_counter()
    exact = agree = 0
    for seed in range(20):
        rng = np.random.default_rng(600 + seed)
        edges = random_tree(rng, 8)
        G = tree_gamma(8, edges, rng.uniform(0.5, 2.0, size=7))
        X = sample_hr_pareto(G, 50_000, seed=seed)
        vario = emst(X, CFG).graph.edges
        chi = emst(X, CFG, "chi").graph.edges
        exact += vario == UndirectedGraph(8, frozenset(edges)).edges
        agree += vario == chi
    assert exact >= 19
    assert agree >= 18
    assert time.perf_counter() - t0 < 300


def test_criterion_07_eglearn_sparsistency():
    t0 = time.perf_counter()
    truth = five_graph().edges
    hits = 0
    for seed in range(20):
        X = sample_hr_pareto(SIM_GAMMA, 100_000, seed=700 + seed)
        grid = default_grid(X, CFG)
        assert len(grid) == 10
        hits += any(r.graph.edges == truth for r in eglearn_path(X, CFG, grid))
    assert hits >= 16
    assert time.perf_counter() - t0 < 600


def test_criterion_08_emtp2():
    t0 = time.perf_counter()
    truth = five_graph().edges
    G = emtp2_gamma()
    supergraph = 0
    for seed in range(20):
        Ghat = emp_vario_joint(sample_hr_pareto(G, 100_000, seed=800 + seed), CFG)
        fit = emtp2_fit(Ghat)
        off = fit.Theta[~np.eye(5, dtype=bool)]
        assert off.max() <= 1e-9
        assert check_metric_property(fit.Gamma)[0]
        assert fit.info["kkt_residual"] < 1e-8
        supergraph += truth <= fit.graph.edges
    assert supergraph >= 18
    assert time.perf_counter() - t0 < 600


def _random_dag(rng, d):
    perm = rng.permutation(d)
    arcs = {(int(perm[a]), int(perm[b])) for a in range(d) for b in range(a + 1, d) if rng.random() < 0.4}
    return Dag(d, frozenset(arcs))


def _path_product_coefficients(spec):
    # brute force over every directed path, multiplied in the order of the recursion
    d = spec.dag.num_nodes
    A = np.diag(spec.node_weights).astype(float)
    for i, j in itertools.permutations(range(d), 2):
        best = 0.0
        for path in directed_paths(spec.dag, j, i):
            acc = 1.0
            for arc in path:
                acc = spec.arc_weights[arc] * acc
            best = max(best, acc)
        A[i, j] = best * spec.node_weights[j]
    return A


def test_criterion_09_recursive_max_linear():
    D = diamond_dag()
    pvals = []
    for seed in range(10):
        rng = np.random.default_rng(900 + seed)
        spec = RecursiveMLSpec(D, {a: rng.uniform(0.1, 2.0) for a in D.arcs}, rng.uniform(0.1, 2.0, 4))
        Zr = sample_recursive_max_linear(spec, 10_000, seed=2 * seed)
        Zc = sample_max_linear(ml_coefficients(spec), 10_000, seed=2 * seed + 1, require_standard=False)
        pvals += [stats.ks_2samp(Zr[:, i], Zc[:, i]).pvalue for i in range(4)]
    assert min(pvals) > 0.01, f"smallest KS p-value {min(pvals):.4g}"
    rng = np.random.default_rng(99)
    for _ in range(100):
        D = _random_dag(rng, int(rng.integers(2, 9)))
        spec = RecursiveMLSpec(D, {a: rng.uniform(0.1, 2.0) for a in D.arcs}, rng.uniform(0.1, 2.0, D.num_nodes))
        np.testing.assert_array_equal(ml_coefficients(spec), _path_product_coefficients(spec))


def _ordered_triples(n):
    for labels in itertools.product(range(4), repeat=n):
        A = {v for v in range(n) if labels[v] == 1}
        B = {v for v in range(n) if labels[v] == 2}
        if A and B:
            yield A, B, {v for v in range(n) if labels[v] == 3}


def test_criterion_10_separation():
    pairs_checked = 0
    for n in range(2, 6):
        slots = list(itertools.combinations(range(n), 2))
        triples = list(_ordered_triples(n))
        for mask in range(1 << len(slots)):
            D = Dag(n, frozenset(s for k, s in enumerate(slots) if mask >> k & 1))
            for A, B, C in triples:
                assert d_separates(D, A, B, C) == moral_separates(D, A, B, C)
                pairs_checked += 1
    assert pairs_checked == sum((1 << (n * (n - 1) // 2)) * (4**n - 2 * 3**n + 2**n) for n in range(2, 6))
    C4 = four_cycle()
    assert separates(C4, {0}, {2}, {1, 3}) and not separates(C4, {0}, {2}, {1})
    assert d_separates(diamond_dag(), {1}, {3}, {0}) and not d_separates(diamond_dag(), {1}, {3}, {0, 2})
    assert not d_separates(cassiopeia_dag(), {0}, {2}, {3, 4})


def _connected_random_graph(rng, d, n_edges):
    edges = set(random_tree(rng, d))
    pool = [e for e in itertools.combinations(range(d), 2) if e not in edges]
    extra = rng.choice(len(pool), size=n_edges - len(edges), replace=False)
    return UndirectedGraph(d, frozenset(edges | {pool[k] for k in extra}))


def test_criterion_11_surrogate_likelihood():
    T = 0.5 * np.array([[1.0, -1.0], [-1.0, 1.0]])
    assert abs(surrogate_loglik(T, np.array([[0.0, 2.0], [2.0, 0.0]])) - (-1.0)) <= 1e-12
    d, n_edges, wins = 10, 14, 0
    for seed in range(20):
        rng = np.random.default_rng(1100 + seed)
        truth = _connected_random_graph(rng, d, n_edges)
        rival = truth
        while rival.edges == truth.edges:
            rival = _connected_random_graph(rng, d, n_edges)
        e = truth.sorted_edges()
        ei, ej = np.array([a for a, _ in e]), np.array([b for _, b in e])
        G = sigma_to_gamma(laplacian_pinv(laplacian(d, ei, ej, rng.uniform(1.0, 3.0, len(e)))))
        X = sample_hr_pareto(G, 200_000, seed=seed)
        train, test = X[:100_000], X[100_000:]
        Gh = emp_vario_joint(train, CFG)
        s_true = evaluate_loglik(complete_gamma(PartialVariogram.from_full(truth, Gh)), test, CFG).score
        s_rival = evaluate_loglik(complete_gamma(PartialVariogram.from_full(rival, Gh)), test, CFG).score
        wins += s_true > s_rival
    assert wins >= 18
