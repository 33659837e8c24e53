"""Rank-based nonparametric tail estimators."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .errors import ConfigError, DataError, InvalidVariogramError, DegenerateMatrixError, NotPSDError
from .hr import FittedModel, gamma_to_theta, surrogate_loglik, validate_variogram


@dataclass(frozen=True)
class EstimatorConfig:
    """Threshold probability ``p``; each root uses ``k = ceil(n (1 - p))`` exceedances."""

    p: float = 0.95

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise ConfigError(f"threshold probability p must lie in (0, 1), got {self.p}")

    def k(self, n: int) -> int:
        # guard against n * (1 - p) landing a hair above an integer
        return max(0, math.ceil(n * (1 - self.p) - 1e-9))


def as_data(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DataError("data must be a two-dimensional n x d array")
    if X.shape[0] < 2:
        raise DataError("need at least two observations")
    if not np.all(np.isfinite(X)):
        raise DataError("data contains missing or non-finite values")
    return X


def rank_pareto_transform(X) -> np.ndarray:
    """Column-wise empirical standard-Pareto scale ``(n+1) / (n+1 - rank)``.

    Ties get average ranks, so values lie in ``[(n+1)/n, n+1]``.
    """
    X = as_data(X)
    n = X.shape[0]
    for j in range(X.shape[1]):
        if np.all(X[:, j] == X[0, j]):
            raise DataError(f"column {j + 1} is constant")
    R = rankdata(X, method="average", axis=0)
    return (n + 1) / (n + 1 - R)


def _top_rows(col: np.ndarray, k: int) -> np.ndarray:
    # strict top-k by value, ties resolved towards the lower row index
    order = np.lexsort((np.arange(col.size), -col))
    return order[:k]


def _vario_from_logs(L: np.ndarray) -> np.ndarray:
    d = L.shape[1]
    G = np.zeros((d, d))
    for i in range(d):
        diff = L[:, [i]] - L[:, i + 1:]
        G[i, i + 1:] = np.var(diff, axis=0, ddof=1)
    return G + G.T


def _pareto_logs(X, cfg: EstimatorConfig, transformed: bool):
    P = as_data(X) if transformed else rank_pareto_transform(X)
    k = cfg.k(P.shape[0])
    if k < 2:
        raise ConfigError(f"k = {k} exceedances; need at least 2 (increase n or lower p)")
    return np.log(P), k


def emp_vario_m(X, m: int, cfg: EstimatorConfig = EstimatorConfig(), transformed: bool = False) -> np.ndarray:
    """Empirical extremal variogram rooted at column ``m``.

    Sample variances (``n - 1`` denominator) of pairwise log differences over
    the ``k`` rows with the largest values in column ``m``. Pass
    ``transformed=True`` when ``X`` is already on the Pareto scale.
    """
    L, k = _pareto_logs(X, cfg, transformed)
    if not 0 <= m < L.shape[1]:
        raise ValueError(f"root {m} out of range")
    return _vario_from_logs(L[_top_rows(L[:, m], k)])


def emp_vario_joint(X, cfg: EstimatorConfig = EstimatorConfig(), transformed: bool = False) -> np.ndarray:
    """Average of the rooted empirical variograms over all roots."""
    L, k = _pareto_logs(X, cfg, transformed)
    d = L.shape[1]
    total = np.zeros((d, d))
    for m in range(d):
        total += _vario_from_logs(L[_top_rows(L[:, m], k)])
    return total / d


def emp_vario_all(X, cfg: EstimatorConfig = EstimatorConfig(), transformed: bool = False) -> np.ndarray:
    """Stack of all rooted variograms, shape ``(d, d, d)`` indexed by root first."""
    L, k = _pareto_logs(X, cfg, transformed)
    return np.stack([_vario_from_logs(L[_top_rows(L[:, m], k)]) for m in range(L.shape[1])])


def emp_chi(X, cfg: EstimatorConfig = EstimatorConfig()) -> np.ndarray:
    """Empirical extremal correlation at level ``p``.

    ``P(j exceeds | i exceeds)`` and ``P(i exceeds | j exceeds)`` are averaged;
    a column exceeds when its rank is above ``n p``.
    """
    X = as_data(X)
    n = X.shape[0]
    R = rankdata(X, method="average", axis=0)
    E = (R > n * cfg.p).astype(float)
    counts = E.sum(axis=0)
    if np.any(counts < 1):
        raise ConfigError("no exceedances at this threshold")
    joint = E.T @ E
    cond = joint / counts[:, None]
    chi = np.clip((cond + cond.T) / 2, 0.0, 1.0)
    np.fill_diagonal(chi, 1.0)
    return chi


@dataclass(frozen=True)
class Evaluation:
    score: float
    raw_loglik: float
    saturated_loglik: float | None

    @property
    def saturated_available(self) -> bool:
        return self.saturated_loglik is not None


def evaluate_loglik(model: FittedModel, Xtest, cfg: EstimatorConfig = EstimatorConfig()) -> Evaluation:
    """Surrogate test log-likelihood of ``model`` relative to the saturated fit.

    ``score = l(Theta_model; G_test) - l(Theta_sat; G_test)`` where ``G_test``
    is the joint empirical variogram of the test data and ``Theta_sat`` its
    own precision matrix; the score is at most zero and higher is better.
    If ``G_test`` is not a valid variogram the raw likelihood is returned as
    the score and ``saturated_loglik`` is ``None``.
    """
    Gt = emp_vario_joint(Xtest, cfg)
    if Gt.shape != model.Gamma.shape:
        raise DataError(f"model has dimension {model.dim}, test data has {Gt.shape[0]}")
    raw = surrogate_loglik(model.Theta, Gt)
    try:
        sat = surrogate_loglik(gamma_to_theta(validate_variogram(Gt)), Gt)
    except (InvalidVariogramError, DegenerateMatrixError, NotPSDError):
        return Evaluation(raw, raw, None)
    return Evaluation(raw - sat, raw, sat)
