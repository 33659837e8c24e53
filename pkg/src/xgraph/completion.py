"""Graph-constrained completion of partially specified variograms.

Given variogram values on the edges of a connected graph, find the unique
valid variogram that matches them on the edges and whose precision matrix
vanishes off the graph. This is also the maximizer of the surrogate
likelihood under the graph's zero constraints.

Decomposable graphs are completed in closed form clique by clique. Other
graphs use exact coordinate ascent over edge weights of the Laplacian
parameterization ``Theta = sum_e w_e (e_i - e_j)(e_i - e_j)^T``, polished
by Newton steps.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, DataError, InvalidVariogramError, StructureError
from .graphs import (
    UndirectedGraph,
    cliques,
    is_block_graph,
    is_decomposable,
    junction_order,
    shortest_path,
)
from .hr import FittedModel, gamma_to_theta, sigma_to_gamma, validate_variogram

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PartialVariogram:
    """Variogram entries known on the edges of ``graph``; other entries are NaN."""

    graph: UndirectedGraph
    values: np.ndarray

    def __post_init__(self):
        V = np.array(self.values, dtype=float)
        d = self.graph.num_nodes
        if V.shape != (d, d):
            raise DataError(f"partial matrix shape {V.shape} does not match {d} nodes")
        out = np.full((d, d), np.nan)
        np.fill_diagonal(out, 0.0)
        for i, j in self.graph.edges:
            a, b = V[i, j], V[j, i]
            if np.isnan(a) and np.isnan(b):
                raise DataError(f"missing value on edge ({i + 1}, {j + 1})")
            val = b if np.isnan(a) else a
            if not np.isnan(b) and abs(a - b) > 1e-8 * (1 + abs(a)):
                raise DataError(f"asymmetric values on edge ({i + 1}, {j + 1})")
            out[i, j] = out[j, i] = val
        object.__setattr__(self, "values", out)

    @classmethod
    def from_full(cls, graph: UndirectedGraph, Gamma) -> "PartialVariogram":
        """Keep the entries of a full matrix that lie on the edges of ``graph``."""
        return cls(graph, np.asarray(Gamma, dtype=float))

    @property
    def dim(self) -> int:
        return self.graph.num_nodes

    def edge_arrays(self):
        edges = self.graph.sorted_edges()
        ei = np.array([e[0] for e in edges], dtype=np.int64)
        ej = np.array([e[1] for e in edges], dtype=np.int64)
        return ei, ej, self.values[ei, ej]


def _check_partial(pv: PartialVariogram) -> None:
    G = pv.graph
    if G.num_nodes < 2:
        raise StructureError("completion needs at least two nodes")
    if not G.is_connected():
        raise StructureError("graph must be connected")
    for c in cliques(G):
        if len(c) < 2:
            continue
        sub = pv.values[np.ix_(c, c)]
        try:
            validate_variogram(sub)
        except InvalidVariogramError as exc:
            labels = ",".join(str(v + 1) for v in c)
            raise InvalidVariogramError(f"clique {{{labels}}} is not a valid variogram: {exc}") from exc


def complete_gamma(
    pv: PartialVariogram,
    method: str = "auto",
    tol: float = 1e-8,
    max_iter: int = 10_000,
) -> FittedModel:
    """Complete ``pv`` to a graph-structured variogram.

    ``method`` is ``"auto"`` (closed form when the graph is decomposable),
    ``"decomposable"`` or ``"iterative"``.
    """
    _check_partial(pv)
    G = pv.graph
    if method == "auto":
        method = "decomposable" if is_decomposable(G)[0] else "iterative"
    if method == "decomposable":
        Gamma = complete_decomposable(pv)
        info = {}
    elif method == "iterative":
        Gamma, info = complete_iterative(pv, tol=tol, max_iter=max_iter)
    else:
        raise ValueError(f"unknown completion method {method!r}")
    Gamma = validate_variogram(Gamma)
    return FittedModel(G, Gamma, _graph_theta(Gamma, G), method=f"completion-{method}", info=info)


def _graph_theta(Gamma: np.ndarray, G: UndirectedGraph) -> np.ndarray:
    T = gamma_to_theta(Gamma)
    mask = ~G.adjacency()
    np.fill_diagonal(mask, False)
    # entries off the graph are zero up to round-off; store them exactly
    scale = np.max(np.abs(T))
    if np.max(np.abs(T[mask]), initial=0.0) < 1e-6 * scale:
        T[mask] = 0.0
        np.fill_diagonal(T, 0.0)
        np.fill_diagonal(T, -T.sum(axis=1))
    return T


def complete_decomposable(pv: PartialVariogram, root: int = 0) -> np.ndarray:
    """Closed-form completion along a running-intersection order of the cliques.

    When a clique ``C`` is attached to the covered set ``H`` through separator
    ``S``, the missing block between ``A = H \\ S`` and ``B = C \\ S`` follows
    from Gaussian conditional independence of the increments rooted at some
    ``m`` in ``S``: ``Sigma_AB = Sigma_AS' Sigma_S'S'^{-1} Sigma_S'B``.
    """
    G = pv.graph
    order = junction_order(G, root=root)
    Gam = pv.values.copy()
    covered: list[int] = []
    for clique, sep in order:
        if not sep:
            covered = list(clique)
            continue
        S = list(sep)
        m = S[0]
        Sp = S[1:]
        A = [v for v in covered if v not in sep]
        B = [v for v in clique if v not in sep]
        if A and B:
            def sig(X, Y):
                return 0.5 * (Gam[X, m][:, None] + Gam[m, Y][None, :] - Gam[np.ix_(X, Y)])

            if Sp:
                cross = sig(A, Sp) @ np.linalg.solve(sig(Sp, Sp), sig(Sp, B))
            else:
                cross = np.zeros((len(A), len(B)))
            block = Gam[A, m][:, None] + Gam[m, B][None, :] - 2 * cross
            Gam[np.ix_(A, B)] = block
            Gam[np.ix_(B, A)] = block.T
        covered = covered + B
    if np.isnan(Gam).any():
        raise StructureError("completion left entries undetermined")
    return (Gam + Gam.T) / 2


def complete_tree_blockgraph(pv: PartialVariogram) -> np.ndarray:
    """Path-sum completion for trees and block graphs.

    Each non-edge entry is the sum of the edge entries along the unique
    shortest path between its endpoints.
    """
    G = pv.graph
    if not is_block_graph(G):
        raise StructureError("graph is neither a tree nor a block graph")
    d = G.num_nodes
    Gam = np.zeros((d, d))
    for i in range(d):
        for j in range(i + 1, d):
            if G.has_edge(i, j):
                val = pv.values[i, j]
            else:
                val = sum(pv.values[a, b] for a, b in shortest_path(G, i, j))
            Gam[i, j] = Gam[j, i] = val
    return Gam


# ---------------------------------------------------------------- iterative solver

def laplacian(d: int, ei, ej, w) -> np.ndarray:
    L = np.zeros((d, d))
    np.add.at(L, (ei, ej), -w)
    np.add.at(L, (ej, ei), -w)
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    return L


def laplacian_pinv(L: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of a connected Laplacian via ``(L + 11^T/d)^{-1} - 11^T/d``;
    raises ``LinAlgError`` if ``L`` is not PSD of rank d - 1."""
    d = L.shape[0]
    J = np.full((d, d), 1.0 / d)
    C = np.linalg.cholesky(L + J)
    Ci = np.linalg.inv(C)
    S = Ci.T @ Ci - J
    return (S + S.T) / 2


def _initial_weights(target: np.ndarray, d: int) -> np.ndarray:
    w0 = 1.0 / target
    # best scalar multiple: maximizes (d-1) log s - s * sum(w0 * target)
    return w0 * (d - 1) / len(target)


def _edge_gammas(S, ei, ej):
    return S[ei, ei] + S[ej, ej] - 2 * S[ei, ej]


def newton_laplacian(d, ei, ej, target, w, tol=1e-10, max_iter=100):
    """Damped Newton ascent on ``log Det L(w) - w . target`` over free weights.

    Returns ``(w, Sigma, converged)``.
    """
    w = w.copy()
    S = laplacian_pinv(laplacian(d, ei, ej, w))
    U = np.zeros((len(w), d))
    U[np.arange(len(w)), ei] = 1.0
    U[np.arange(len(w)), ej] = -1.0

    def objective(wv):
        L = laplacian(d, ei, ej, wv)
        try:
            C = np.linalg.cholesky(L + np.full((d, d), 1.0 / d))
        except np.linalg.LinAlgError:
            return -np.inf
        return 2 * np.sum(np.log(np.diag(C))) - wv @ target

    f = objective(w)
    for _ in range(max_iter):
        grad = _edge_gammas(S, ei, ej) - target
        if np.max(np.abs(grad) / (1 + target)) < tol:
            return w, S, True
        M = U @ S @ U.T
        H = M * M
        try:
            step = np.linalg.solve(H, grad)
        except np.linalg.LinAlgError:
            return w, S, False
        alpha, slope = 1.0, grad @ step
        while alpha > 1e-12:
            cand = w + alpha * step
            fc = objective(cand)
            if fc >= f + 1e-4 * alpha * slope:
                break
            alpha /= 2
        else:
            return w, S, False
        w, f = cand, fc
        S = laplacian_pinv(laplacian(d, ei, ej, w))
    grad = _edge_gammas(S, ei, ej) - target
    return w, S, bool(np.max(np.abs(grad) / (1 + target)) < tol)


def complete_iterative(pv: PartialVariogram, tol: float = 1e-8, max_iter: int = 10_000):
    """Edge-wise coordinate ascent (one closed-form update per edge, rank-one
    update of the covariance), followed by Newton polishing.

    Returns ``(Gamma, info)``; raises :class:`ConvergenceError` after
    ``max_iter`` sweeps.
    """
    d = pv.dim
    ei, ej, target = pv.edge_arrays()
    if np.any(target <= 0):
        raise InvalidVariogramError("edge values must be positive")
    w = _initial_weights(target, d)
    S = np.ascontiguousarray(laplacian_pinv(laplacian(d, ei, ej, w)))
    sweeps, resid, polished = 0, np.inf, False
    while sweeps < max_iter:
        batch = min(25, max_iter - sweeps)
        resid = kernels.laplacian_sweep(S, w, ei, ej, target, False, batch)
        sweeps += batch
        # refresh to remove drift from the accumulated rank-one updates
        S = np.ascontiguousarray(laplacian_pinv(laplacian(d, ei, ej, w)))
        if resid < 1e-4 and not polished:
            wn, Sn, ok = newton_laplacian(d, ei, ej, target, w, tol=tol * 1e-2)
            polished = True
            if ok:
                w, S = wn, np.ascontiguousarray(Sn)
                resid = float(np.max(np.abs(_edge_gammas(S, ei, ej) - target) / (1 + target)))
        if resid < tol:
            break
    else:
        raise ConvergenceError(f"completion did not converge in {max_iter} sweeps (residual {resid:.3g})")
    Gamma = sigma_to_gamma(S)
    Gamma[ei, ej] = Gamma[ej, ei] = target
    log.debug("iterative completion: %d sweeps, residual %.3g", sweeps, resid)
    return Gamma, {"sweeps": sweeps, "residual": float(resid)}
