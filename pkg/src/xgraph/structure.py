"""Structure learning for extremal graphs.

* :func:`emst` - minimum spanning tree under empirical variogram or
  ``-log chi`` weights.
* :func:`eglearn` - majority vote over per-root neighborhood selection.
* :func:`emtp2_fit` - surrogate likelihood maximized over graph Laplacians.
* :func:`parameter_shift_fit` - graphical lasso on ``Theta + c 11^T``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .completion import _initial_weights, _edge_gammas, laplacian, laplacian_pinv, newton_laplacian
from .errors import ConfigError, ConvergenceError, DataError
from .estimators import EstimatorConfig, _top_rows, emp_chi, emp_vario_joint, rank_pareto_transform
from .graphs import UndirectedGraph, minimum_spanning_tree
from .hr import FittedModel, precision_issues, sigma_to_gamma, support_graph
from .linalg import as_symmetric, center_project

log = logging.getLogger(__name__)

SUPPORT_TOL = 1e-6


@dataclass(frozen=True)
class LearnResult:
    graph: UndirectedGraph
    scores: np.ndarray | None = None
    penalty: float | None = None
    method: str = ""
    info: dict = field(default_factory=dict)

    @property
    def connected(self) -> bool:
        return self.graph.is_connected()


# ---------------------------------------------------------------- EMST

def emst(X, cfg: EstimatorConfig = EstimatorConfig(), weight_kind: str = "variogram") -> LearnResult:
    """Extremal minimum spanning tree.

    Weights are the joint empirical variogram or ``-log chi_hat``; pairs with
    ``chi_hat = 0`` get infinite weight and are unusable as tree edges.
    """
    if weight_kind == "variogram":
        W = emp_vario_joint(X, cfg)
    elif weight_kind == "chi":
        chi = emp_chi(X, cfg)
        with np.errstate(divide="ignore"):
            W = -np.log(chi)
    else:
        raise ConfigError(f"unknown weight kind {weight_kind!r}")
    W = (W + W.T) / 2
    tree = minimum_spanning_tree(W)
    return LearnResult(tree, W, None, f"emst-{weight_kind}")


# ---------------------------------------------------------------- eglearn

@dataclass(frozen=True)
class _RootDesign:
    m: int
    others: np.ndarray
    S: np.ndarray  # correlation of the centered log-increments
    k: int


def _root_designs(X, cfg: EstimatorConfig) -> list[_RootDesign]:
    L = np.log(rank_pareto_transform(X))
    n, d = L.shape
    k = cfg.k(n)
    if k < 2:
        raise ConfigError(f"k = {k} exceedances; need at least 2")
    if k < d:
        warnings.warn(f"only k = {k} exceedances for d = {d}; regressions are ill-posed", RuntimeWarning)
    out = []
    for m in range(d):
        rows = _top_rows(L[:, m], k)
        others = np.array([i for i in range(d) if i != m])
        Z = L[np.ix_(rows, others)] - L[rows, m][:, None]
        Z = Z - Z.mean(axis=0)
        C = Z.T @ Z / k
        sd = np.sqrt(np.diag(C))
        if np.any(sd == 0):
            raise DataError(f"constant log-increment among the exceedances of column {m + 1}")
        out.append(_RootDesign(m, others, C / np.outer(sd, sd), k))
    return out


def _lasso_gap(Q, b, syy, beta, lam):
    """Duality gap of ``0.5 |y - X beta|^2 / k + lam |beta|_1`` in covariance form."""
    grad = b - Q @ beta  # X'r / k
    rss = syy - 2 * b @ beta + beta @ Q @ beta
    primal = 0.5 * rss + lam * np.abs(beta).sum()
    top = np.max(np.abs(grad), initial=0.0)
    s = 1.0 if top <= lam else lam / top
    yr = syy - b @ beta
    dual = s * yr - 0.5 * s * s * rss
    return primal - dual


def _neighborhoods(design: _RootDesign, rho: float, warm: dict, gap_tol: float) -> np.ndarray:
    """Selected-neighbor matrix (local indices) for one root, or-rule symmetrized."""
    S = design.S
    p = S.shape[0]
    sel = np.zeros((p, p), dtype=bool)
    for a in range(p):
        rest = np.array([r for r in range(p) if r != a])
        if rest.size == 0:
            continue
        Q = np.ascontiguousarray(S[np.ix_(rest, rest)])
        b = S[rest, a]
        beta = warm.get(a)
        beta = np.zeros(rest.size) if beta is None else beta.copy()
        lam = np.full(rest.size, rho)
        tol = 1e-10
        for _ in range(20):
            kernels.lasso_cd(Q, b, lam, np.zeros(rest.size), beta, tol=tol, max_iter=100_000)
            if _lasso_gap(Q, b, S[a, a], beta, rho) < gap_tol:
                break
            tol /= 100
        warm[a] = beta
        sel[a, rest] = beta != 0
    return sel | sel.T


def eglearn_path(X, cfg: EstimatorConfig, rhos: Sequence[float], gap_tol: float = 1e-7) -> list[LearnResult]:
    """:func:`eglearn` along a penalty grid, warm-starting from large to small ``rho``."""
    rhos = [float(r) for r in rhos]
    if not rhos or any(r < 0 for r in rhos):
        raise ConfigError("penalty grid must be nonempty and nonnegative")
    X = np.asarray(X, dtype=float)
    d = X.shape[1]
    designs = _root_designs(X, cfg)
    warm = [dict() for _ in designs]
    results: dict[int, LearnResult] = {}
    for idx in sorted(range(len(rhos)), key=lambda i: -rhos[i]):
        rho = rhos[idx]
        votes = np.zeros((d, d), dtype=int)
        for des, ws in zip(designs, warm):
            sel = _neighborhoods(des, rho, ws, gap_tol)
            o = des.others
            votes[np.ix_(o, o)] += sel
        if d <= 2:
            A = ~np.eye(d, dtype=bool)
        else:
            A = votes > (d - 2) / 2
        np.fill_diagonal(A, False)
        results[idx] = LearnResult(UndirectedGraph.from_adjacency(A), votes, rho, "eglearn")
    return [results[i] for i in range(len(rhos))]


def eglearn(X, cfg: EstimatorConfig = EstimatorConfig(), rho: float = 0.1) -> LearnResult:
    """Majority-vote structure learning.

    For every root ``m`` the node-wise lasso (penalty ``rho``) is run on the
    centered, unit-variance log-increments of the ``k`` exceedance rows of column ``m``; an
    edge ``(i, j)`` gets a vote from root ``m`` when either regression
    selects the other node. Edges need votes from a strict majority of the
    ``d - 2`` roots distinct from ``i`` and ``j``. The result may be
    disconnected.
    """
    if rho < 0:
        raise ConfigError("rho must be nonnegative")
    return eglearn_path(X, cfg, [rho])[0]


def rho_max(X, cfg: EstimatorConfig = EstimatorConfig()) -> float:
    """Smallest penalty at which every node-wise regression is empty."""
    top = 0.0
    for des in _root_designs(X, cfg):
        S = des.S.copy()
        np.fill_diagonal(S, 0.0)
        top = max(top, np.max(np.abs(S), initial=0.0))
    return float(top)


def default_grid(X, cfg: EstimatorConfig = EstimatorConfig(), num: int = 10, ratio: float = 0.01) -> np.ndarray:
    """Log-spaced ascending grid from ``ratio * rho_max`` to ``rho_max``."""
    top = rho_max(X, cfg)
    return np.geomspace(ratio * top, top, num)


# ---------------------------------------------------------------- EMTP2

def _kkt(S, w, ei, ej, target):
    g = _edge_gammas(S, ei, ej) - target
    r = np.where(w > 0, np.abs(g), np.maximum(g, 0.0))
    return float(np.max(r / (1 + target), initial=0.0))


def emtp2_fit(Ghat, tol: float = 1e-8, max_iter: int = 10_000) -> FittedModel:
    """Maximize the surrogate likelihood over Laplacian precision matrices.

    Writing ``Theta = sum_{i<j} w_ij (e_i - e_j)(e_i - e_j)^T`` with
    ``w >= 0``, the problem is concave in ``w``; each coordinate has a
    closed-form maximizer (clipped at zero). Coordinate sweeps are combined
    with Newton steps on the current support. At the optimum the fitted
    variogram equals ``Ghat`` on edges and does not exceed it elsewhere.
    """
    G = as_symmetric(Ghat, "Gamma")
    d = G.shape[0]
    if d < 2:
        raise DataError("need dimension >= 2")
    ei, ej = np.triu_indices(d, 1)
    ei = ei.astype(np.int64)
    ej = ej.astype(np.int64)
    target = G[ei, ej].copy()
    if np.any(target <= 0):
        raise DataError("EMTP2 fit needs strictly positive off-diagonal variogram entries")
    w = _initial_weights(target, d)
    S = np.ascontiguousarray(laplacian_pinv(laplacian(d, ei, ej, w)))
    sweeps, resid = 0, np.inf
    while sweeps < max_iter:
        batch = min(20, max_iter - sweeps)
        kernels.laplacian_sweep(S, w, ei, ej, target, True, batch)
        sweeps += batch
        S = np.ascontiguousarray(laplacian_pinv(laplacian(d, ei, ej, w)))
        resid = _kkt(S, w, ei, ej, target)
        if resid < tol:
            break
        if resid < 1e-2:
            free = w > 0
            wf, _, ok = newton_laplacian(d, ei[free], ej[free], target[free], w[free], tol=tol * 1e-2)
            if ok and np.all(wf > 0):
                w2 = np.zeros_like(w)
                w2[free] = wf
                S2 = np.ascontiguousarray(laplacian_pinv(laplacian(d, ei, ej, w2)))
                r2 = _kkt(S2, w2, ei, ej, target)
                if r2 < resid:
                    w, S, resid = w2, S2, r2
                    if resid < tol:
                        break
    else:
        raise ConvergenceError(f"EMTP2 solver did not reach KKT residual {tol} in {max_iter} sweeps ({resid:.3g})")
    Theta = laplacian(d, ei, ej, w)
    Gamma = sigma_to_gamma(S)
    graph = support_graph(Theta, SUPPORT_TOL)
    info = {"kkt_residual": resid, "sweeps": sweeps}
    log.debug("emtp2: %d sweeps, KKT %.3g, %d edges", sweeps, resid, graph.n_edges)
    return FittedModel(graph, Gamma, Theta, method="emtp2", info=info)


# ---------------------------------------------------------------- parameter shift

@dataclass(frozen=True)
class ShiftResult(LearnResult):
    Theta: np.ndarray | None = None
    valid: bool = False


def shifted_covariance(Ghat, c: float) -> np.ndarray:
    """``P(-Ghat/2)P + 11^T / (c d^2)``, the inverse of ``Theta + c 11^T``."""
    G = as_symmetric(Ghat, "Gamma")
    d = G.shape[0]
    return center_project(-G / 2) + np.full((d, d), 1.0 / (c * d * d))


def parameter_shift_fit(Ghat, lam: float, c: float | None = None, tol: float = 1e-10,
                        max_iter: int = 1000, Sigma_star=None) -> ShiftResult:
    """Graphical lasso on the shifted matrix ``Theta* = Theta + c 11^T``.

    Minimizes ``-log det(Theta*) + tr(Theta* S*) + lam * sum_{i != j} |Theta*_ij - c|``
    by primal block coordinate descent over columns; each column is a
    lasso centered at ``c``. Returns the support of
    ``Theta = Theta* - c 11^T`` and whether it is a valid precision matrix.
    """
    if lam < 0:
        raise ConfigError("lambda must be nonnegative")
    G = as_symmetric(Ghat, "Gamma")
    d = G.shape[0]
    c = 1.0 / d if c is None else float(c)
    if c <= 0:
        raise ConfigError("shift constant c must be positive")
    Sst = shifted_covariance(G, c) if Sigma_star is None else as_symmetric(Sigma_star)
    try:
        np.linalg.cholesky(Sst)
    except np.linalg.LinAlgError as exc:
        raise DataError("shifted covariance is not positive definite") from exc
    s = np.diag(Sst).copy()
    T = np.diag(1.0 / s)
    W = np.diag(s)
    for sweep in range(1, max_iter + 1):
        change = 0.0
        for j in range(d):
            idx = np.array([i for i in range(d) if i != j])
            w12 = W[idx, j]
            A = W[np.ix_(idx, idx)] - np.outer(w12, w12) / W[j, j]
            A = (A + A.T) / 2
            theta = T[idx, j].copy()
            old = theta.copy()
            kernels.lasso_cd(np.ascontiguousarray(s[j] * A), -Sst[idx, j], np.full(d - 1, lam),
                             np.full(d - 1, c), theta, tol=tol * 1e-2, max_iter=100_000)
            At = A @ theta
            change = max(change, np.max(np.abs(theta - old), initial=0.0))
            T[idx, j] = T[j, idx] = theta
            T[j, j] = 1.0 / s[j] + theta @ At
            new12 = -At * s[j]
            W[np.ix_(idx, idx)] = A + np.outer(new12, new12) / s[j]
            W[idx, j] = W[j, idx] = new12
            W[j, j] = s[j]
        if change < tol * max(1.0, np.max(np.abs(T))):
            break
    else:
        raise ConvergenceError(f"parameter-shift lasso did not converge in {max_iter} sweeps")
    Theta = T - c
    off = ~np.eye(d, dtype=bool)
    Theta[off & (np.abs(Theta) <= 1e-14 * np.max(np.abs(T)))] = 0.0
    graph = support_graph(Theta, SUPPORT_TOL)
    valid = not precision_issues(Theta)
    return ShiftResult(graph, None, lam, "parameter-shift", {"sweeps": sweep, "c": c}, Theta=Theta, valid=valid)


def parameter_shift_path(Ghat, lams: Sequence[float], c: float | None = None) -> list[ShiftResult]:
    return [parameter_shift_fit(Ghat, lam, c) for lam in lams]
