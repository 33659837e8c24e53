"""The Husler-Reiss family: variogram/precision transforms, validity checks,
exponent measure density, extremal correlation and the surrogate likelihood."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.special import erfc

from .errors import InvalidPrecisionError, InvalidVariogramError, DataError
from .graphs import UndirectedGraph
from .linalg import (
    as_symmetric,
    center_project,
    log_pseudo_determinant,
    projection,
    pseudo_inverse,
    sym_eig,
)

VALIDITY_TOL = 1e-8


def variogram_spectrum(G) -> np.ndarray:
    """Eigenvalues (descending) of ``P(-G/2)P``."""
    return sym_eig(center_project(-as_symmetric(G, "Gamma") / 2)).eigenvalues


def validate_variogram(G, tol: float = VALIDITY_TOL) -> np.ndarray:
    """Return ``G`` as an exactly symmetric float array or raise.

    A valid variogram has a zero diagonal, positive off-diagonal entries and
    ``P(-G/2)P`` positive semidefinite with rank ``d - 1``.
    """
    G = as_symmetric(G, "Gamma")
    d = G.shape[0]
    if d < 2:
        raise InvalidVariogramError("variogram needs dimension >= 2")
    if np.max(np.abs(np.diag(G))) > tol * (1 + np.max(np.abs(G))):
        raise InvalidVariogramError("variogram diagonal must be zero")
    off = G[~np.eye(d, dtype=bool)]
    if np.any(off <= 0):
        raise InvalidVariogramError("variogram off-diagonal entries must be positive")
    w = variogram_spectrum(G)
    top = w[0]
    if top <= 0 or w[-1] < -tol * top or w[-2] <= tol * top:
        raise InvalidVariogramError(
            "variogram is not strictly conditionally negative definite "
            f"(eigenvalues of P(-G/2)P range {w[-1]:.3g} .. {top:.3g})"
        )
    np.fill_diagonal(G, 0.0)
    return G


def is_valid_variogram(G, tol: float = VALIDITY_TOL) -> bool:
    try:
        validate_variogram(G, tol)
    except (InvalidVariogramError, DataError):
        return False
    return True


def validate_precision(T, tol: float = VALIDITY_TOL) -> np.ndarray:
    T = as_symmetric(T, "Theta")
    d = T.shape[0]
    scale = np.max(np.abs(T))
    if d < 2 or scale == 0:
        raise InvalidPrecisionError("precision matrix is empty or zero")
    if np.max(np.abs(T.sum(axis=1))) > tol * (1 + scale):
        raise InvalidPrecisionError("precision matrix rows must sum to zero")
    w = sym_eig(T).eigenvalues
    if w[-1] < -tol * w[0]:
        raise InvalidPrecisionError(f"precision matrix is not PSD (min eigenvalue {w[-1]:.3g})")
    if w[-2] <= tol * w[0]:
        raise InvalidPrecisionError("precision matrix rank is below d - 1")
    return T


def precision_issues(T, tol: float = VALIDITY_TOL) -> list[str]:
    """Human-readable list of violated precision-matrix invariants (empty if valid)."""
    try:
        validate_precision(T, tol)
    except (InvalidPrecisionError, DataError) as exc:
        return [str(exc)]
    return []


def gamma_to_theta(G) -> np.ndarray:
    """``Theta = (P(-Gamma/2)P)^+``."""
    G = validate_variogram(G)
    T = pseudo_inverse(center_project(-G / 2))
    return center_project(T)


def theta_to_gamma(T) -> np.ndarray:
    """Inverse of :func:`gamma_to_theta`: ``Gamma_ij = S_ii + S_jj - 2 S_ij`` with ``S = Theta^+``."""
    T = validate_precision(T)
    S = pseudo_inverse(T)
    return sigma_to_gamma(S)


def sigma_to_gamma(S) -> np.ndarray:
    s = np.diag(S)
    G = s[:, None] + s[None, :] - 2 * S
    G = (G + G.T) / 2
    np.fill_diagonal(G, 0.0)
    return G


def gamma_to_sigma_m(G, m: int) -> np.ndarray:
    """Covariance of the log-increments of the vector conditioned on component ``m``.

    The result is indexed by the nodes other than ``m`` in increasing order.
    """
    G = validate_variogram(G)
    d = G.shape[0]
    if not 0 <= m < d:
        raise ValueError(f"root {m} out of range")
    idx = [i for i in range(d) if i != m]
    S = 0.5 * (G[idx, m][:, None] + G[m, idx][None, :] - G[np.ix_(idx, idx)])
    return (S + S.T) / 2


def sigma_m_to_gamma(S, m: int) -> np.ndarray:
    """Rebuild the full variogram from the covariance rooted at ``m``."""
    S = as_symmetric(S, "Sigma")
    d = S.shape[0] + 1
    idx = [i for i in range(d) if i != m]
    G = np.zeros((d, d))
    G[np.ix_(idx, idx)] = sigma_to_gamma(S)
    G[idx, m] = G[m, idx] = np.diag(S)
    return G


def hr_chi(G) -> np.ndarray:
    """Extremal correlation matrix ``2 - 2 Phi(sqrt(Gamma_ij) / 2)``."""
    G = validate_variogram(G)
    chi = erfc(np.sqrt(np.maximum(G, 0.0)) / (2 * np.sqrt(2.0)))
    np.fill_diagonal(chi, 1.0)
    return chi


def chi_from_gamma_entry(gamma):
    """Bivariate extremal correlation for variogram value(s) ``gamma``."""
    return erfc(np.sqrt(np.asarray(gamma, dtype=float)) / (2 * np.sqrt(2.0)))


def _density_parts(G: np.ndarray):
    d = G.shape[0]
    T = gamma_to_theta(G)
    mu = projection(d) @ (-G / 2) @ np.ones(d) / d
    # normalizing constant: match the Gaussian law of the increments rooted at 0
    S1 = gamma_to_sigma_m(G, 0)
    half = np.diag(S1) / 2
    _, logdet = np.linalg.slogdet(S1)
    log_phi0 = -0.5 * (d - 1) * np.log(2 * np.pi) - 0.5 * logdet - 0.5 * half @ np.linalg.solve(S1, half)
    log_c = log_phi0 + 0.5 * mu @ T @ mu
    return T, mu, log_c


def log_exponent_density(G, y) -> np.ndarray | float:
    """Log of the exponent measure density at ``y`` (a d-vector or an n x d array)."""
    G = validate_variogram(G)
    d = G.shape[0]
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    Y = np.atleast_2d(y)
    if Y.shape[1] != d:
        raise DataError(f"expected points of dimension {d}, got {Y.shape[1]}")
    if np.any(Y <= 0):
        raise DataError("exponent density is defined for positive coordinates only")
    T, mu, log_c = _density_parts(G)
    X = np.log(Y)
    Z = X - mu
    quad = np.einsum("ni,ij,nj->n", Z, T, Z)
    out = log_c - (1 + 1 / d) * X.sum(axis=1) - 0.5 * quad
    return float(out[0]) if single else out


def exponent_density(G, y):
    """Husler-Reiss exponent measure density, normalized so that its mass on
    ``{y_m > 1}`` is one for every ``m``."""
    return np.exp(log_exponent_density(G, y))


def surrogate_loglik(T, Gbar) -> float:
    """``log Det(Theta) + tr(Theta Gbar) / 2``."""
    T = as_symmetric(T, "Theta")
    Gbar = as_symmetric(Gbar, "Gamma")
    return log_pseudo_determinant(T) + 0.5 * float(np.sum(T * Gbar))


def eglasso_objective(T, Gbar, lam: float) -> float:
    """Penalized objective ``-loglik + lam * sum_{i != j} |Theta_ij|`` (diagnostics only)."""
    T = as_symmetric(T, "Theta")
    off = np.abs(T[~np.eye(T.shape[0], dtype=bool)]).sum()
    return -surrogate_loglik(T, Gbar) + lam * off


def check_metric_property(G, slack: float = 1e-10) -> tuple[bool, list[tuple[int, int, int]]]:
    """Triangle inequalities ``G_ij <= G_ik + G_jk`` over all triples.

    Returns the verdict and the violating triples ``(i, j, k)`` where
    ``G_ij`` is the offending (longest) side.
    """
    G = np.asarray(G, dtype=float)
    d = G.shape[0]
    bad = []
    for a, b, c in itertools.combinations(range(d), 3):
        for i, j, k in ((a, b, c), (a, c, b), (b, c, a)):
            if G[i, j] > G[i, k] + G[j, k] + slack:
                bad.append((i, j, k))
    return not bad, bad


def support_graph(T, rel_tol: float = 1e-6) -> UndirectedGraph:
    """Graph of off-diagonal entries with ``|T_ij| > rel_tol * max_offdiag |T|``."""
    T = np.asarray(T, dtype=float)
    d = T.shape[0]
    off = np.abs(T.copy())
    np.fill_diagonal(off, 0.0)
    top = off.max(initial=0.0)
    if top == 0:
        return UndirectedGraph(d)
    return UndirectedGraph.from_adjacency(off > rel_tol * top)


@dataclass(frozen=True)
class FittedModel:
    """A graph together with a completed variogram and its precision matrix."""

    graph: UndirectedGraph
    Gamma: np.ndarray
    Theta: np.ndarray
    p: float | None = None
    method: str = ""
    penalty: float | None = None
    info: dict[str, Any] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.Gamma.shape[0]

    @classmethod
    def from_gamma(cls, graph: UndirectedGraph, Gamma, **kw) -> "FittedModel":
        Gamma = validate_variogram(Gamma)
        return cls(graph, Gamma, gamma_to_theta(Gamma), **kw)

    def chi(self) -> np.ndarray:
        return hr_chi(self.Gamma)
