"""Exact samplers used as validation oracles.

Every sampler takes an explicit integer seed and draws from a Philox
(counter-based, 64-bit) generator, so identical seeds give bit-identical
output on every platform.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .graphs import Dag
from .hr import gamma_to_sigma_m, validate_variogram


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def _chol(S: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return np.linalg.cholesky(S + 1e-12 * np.eye(S.shape[0]) * max(1.0, np.trace(S)))


def _y_m(G: np.ndarray, m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    d = G.shape[0]
    S = gamma_to_sigma_m(G, m)
    C = _chol(S)
    Z = rng.standard_normal((n, d - 1)) @ C.T - np.diag(S) / 2
    ym = 1.0 / (1.0 - rng.random(n))  # standard Pareto on (1, inf)
    out = np.empty((n, d))
    idx = [i for i in range(d) if i != m]
    out[:, m] = ym
    out[:, idx] = ym[:, None] * np.exp(Z)
    return out


def sample_y_m(G, m: int, n: int, seed) -> np.ndarray:
    """Draws of the Husler-Reiss Pareto vector conditioned on ``Y_m > 1``.

    Column ``m`` is standard Pareto and the log-increments
    ``log Y_i - log Y_m`` are Gaussian with mean ``-diag(S)/2`` and
    covariance ``S = Sigma^(m)``.
    """
    G = validate_variogram(G)
    if n < 1:
        raise ValueError("n must be positive")
    return _y_m(G, m, n, make_rng(seed))


def sample_hr_pareto(G, n: int, seed, return_rate: bool = False):
    """Exact draws of the Husler-Reiss multivariate Pareto vector.

    A root ``J`` is drawn uniformly, a candidate from the law conditioned on
    ``Y_J > 1``, and the candidate is kept with probability
    ``1 / #{i : y_i > 1}``. The mixture of the rooted laws has density
    proportional to ``lambda(y) #{i : y_i > 1}``, so the rejection step
    leaves ``lambda`` restricted to ``{max y > 1}``.
    """
    G = validate_variogram(G)
    d = G.shape[0]
    rng = make_rng(seed)
    chunks, have, tried = [], 0, 0
    while have < n:
        batch = max(64, int(1.2 * (n - have) * d / 2))
        roots = rng.integers(0, d, size=batch)
        cand = np.empty((batch, d))
        for m in range(d):
            sel = np.flatnonzero(roots == m)
            if sel.size:
                cand[sel] = _y_m(G, m, sel.size, rng)
        count = (cand > 1).sum(axis=1)
        keep = rng.random(batch) * count < 1.0
        tried += batch
        chunks.append(cand[keep])
        have += int(keep.sum())
    out = np.concatenate(chunks)[:n]
    if return_rate:
        return out, have / tried
    return out


# ---------------------------------------------------------------- max-linear

def sample_max_linear(A, n: int, seed, require_standard: bool = True) -> np.ndarray:
    """``Z_i = max_j A_ij eps_j`` with independent standard Frechet ``eps``.

    With ``require_standard`` the rows of ``A`` must sum to one, which makes
    every margin standard Frechet.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or np.any(A < 0) or not np.all(np.isfinite(A)):
        raise DataError("coefficient matrix must be a finite nonnegative 2-d array")
    if require_standard and np.max(np.abs(A.sum(axis=1) - 1)) > 1e-8:
        raise DataError("rows of the coefficient matrix must sum to 1")
    rng = make_rng(seed)
    eps = frechet(rng, (n, A.shape[1]))
    return np.max(eps[:, None, :] * A[None, :, :], axis=2)


def frechet(rng: np.random.Generator, size) -> np.ndarray:
    return -1.0 / np.log(rng.random(size))


@dataclass(frozen=True)
class RecursiveMLSpec:
    """Recursive max-linear model: arc weights ``c_ki`` and node weights ``c_ii``."""

    dag: Dag
    arc_weights: dict = field(default_factory=dict)
    node_weights: np.ndarray = None

    def __post_init__(self):
        d = self.dag.num_nodes
        cw = {tuple(int(v) for v in k): float(v) for k, v in dict(self.arc_weights).items()}
        if set(cw) != set(self.dag.arcs):
            raise DataError("arc weights must be given for exactly the arcs of the DAG")
        nw = np.asarray(self.node_weights, dtype=float)
        if nw.shape != (d,):
            raise DataError(f"need {d} node weights")
        if any(v <= 0 for v in cw.values()) or np.any(nw <= 0):
            raise DataError("max-linear weights must be strictly positive")
        object.__setattr__(self, "arc_weights", cw)
        object.__setattr__(self, "node_weights", nw)

    def normalized(self) -> "RecursiveMLSpec":
        """Equivalent spec whose coefficient matrix has unit row sums.

        Dividing ``Z_i`` by row sum ``s_i`` maps ``c_ki -> c_ki s_k / s_i`` and
        ``c_ii -> c_ii / s_i``.
        """
        s = ml_coefficients(self).sum(axis=1)
        cw = {(k, i): c * s[k] / s[i] for (k, i), c in self.arc_weights.items()}
        return RecursiveMLSpec(self.dag, cw, self.node_weights / s)


def ml_coefficients(spec: RecursiveMLSpec) -> np.ndarray:
    """Max-linear coefficient matrix implied by a recursive spec.

    ``a_ii = c_ii`` and ``a_ij = c_jj * max over directed paths j -> i of the
    product of arc weights`` (zero without a path), computed by max-times
    dynamic programming in topological order.
    """
    D = spec.dag
    d = D.num_nodes
    # best[i, j]: maximal path product from j to i (1 on the diagonal)
    best = np.eye(d)
    for i in D.topological_order():
        for k in D.parents(i):
            c = spec.arc_weights[(k, i)]
            best[i] = np.maximum(best[i], c * best[k])
    best[np.arange(d), np.arange(d)] = 1.0
    return best * spec.node_weights[None, :]


def sample_recursive_max_linear(spec: RecursiveMLSpec, n: int, seed) -> np.ndarray:
    """``Z_i = max(max_{k in pa(i)} c_ki Z_k, c_ii eps_i)`` along a topological order."""
    D = spec.dag
    rng = make_rng(seed)
    eps = frechet(rng, (n, D.num_nodes))
    Z = np.zeros((n, D.num_nodes))
    for i in D.topological_order():
        z = spec.node_weights[i] * eps[:, i]
        for k in sorted(D.parents(i)):
            z = np.maximum(z, spec.arc_weights[(k, i)] * Z[:, k])
        Z[:, i] = z
    return Z
