"""Dense symmetric linear algebra shared by the model code.

All routines symmetrize their input as ``(M + M.T) / 2`` and work from an
eigendecomposition; matrices here are small (d up to a few hundred) and
always symmetric.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateMatrixError, DimensionError, NotPSDError, SymmetryError

DEFAULT_TOL = 1e-9
_SYM_TOL = 1e-8


def as_symmetric(M, name: str = "matrix") -> np.ndarray:
    """Return a float copy of ``M`` with exact symmetry.

    Raises if ``M`` is not square or is asymmetric beyond round-off.
    """
    A = np.array(M, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise DimensionError(f"{name} contains non-finite entries")
    scale = 1.0 + np.max(np.abs(A), initial=0.0)
    if np.max(np.abs(A - A.T), initial=0.0) > _SYM_TOL * scale:
        raise SymmetryError(f"{name} is not symmetric")
    return (A + A.T) / 2


@dataclass(frozen=True)
class EigenResult:
    """Eigenvalues sorted in descending order with matching orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.eigenvectors
        return (Q * self.eigenvalues) @ Q.T


def sym_eig(M) -> EigenResult:
    A = as_symmetric(M)
    w, Q = np.linalg.eigh(A)
    order = np.argsort(w)[::-1]
    return EigenResult(w[order], Q[:, order])


def _cutoff(w: np.ndarray, tol: float) -> float:
    return tol * np.max(np.abs(w), initial=0.0)


def pseudo_inverse(M, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix.

    Eigenvalues with ``|lambda| <= tol * max|lambda|`` are treated as zero.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    eig = sym_eig(M)
    w, Q = eig.eigenvalues, eig.eigenvectors
    keep = np.abs(w) > _cutoff(w, tol)
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / w[keep]
    out = (Q * inv) @ Q.T
    return (out + out.T) / 2


def pseudo_determinant(M, tol: float = DEFAULT_TOL) -> float:
    """Product of the eigenvalues of a PSD matrix that exceed ``tol * max``."""
    return float(np.exp(log_pseudo_determinant(M, tol)))


def log_pseudo_determinant(M, tol: float = DEFAULT_TOL) -> float:
    eig = sym_eig(M)
    w = eig.eigenvalues
    cut = _cutoff(w, tol)
    if np.any(w < -cut):
        raise NotPSDError(f"matrix has negative eigenvalue {w.min():.3g}")
    pos = w[w > cut]
    if pos.size == 0:
        raise DegenerateMatrixError("all eigenvalues are numerically zero")
    return float(np.sum(np.log(pos)))


def numerical_rank(M, tol: float = DEFAULT_TOL) -> int:
    w = sym_eig(M).eigenvalues
    return int(np.sum(np.abs(w) > _cutoff(w, tol)))


def projection(d: int) -> np.ndarray:
    """``P = I - 11^T/d``, the projection onto the complement of the ones vector."""
    return np.eye(d) - np.full((d, d), 1.0 / d)


def center_project(M) -> np.ndarray:
    """Compute ``P M P``; rows and columns of the result sum to zero."""
    A = as_symmetric(M)
    # P M P by explicit double centering, cheaper and more exact than two matmuls
    out = A - A.mean(axis=0, keepdims=True)
    out = out - out.mean(axis=1, keepdims=True)
    return (out + out.T) / 2
