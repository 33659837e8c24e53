"""Pure-Python reference implementations of the kernels in ``_kernels.pyx``.

Signatures and in-place semantics match the compiled versions exactly.
"""
import numpy as np


def laplacian_sweep(Sigma, w, ei, ej, target, nonneg, n_sweeps):
    """Exact coordinate ascent on ``log Det L(w) - sum_e w_e target_e``.

    ``L(w)`` is the weighted Laplacian with edge weights ``w`` and ``Sigma``
    its pseudo-inverse; both are updated in place (rank-one updates). With
    ``nonneg`` the weights are clipped at zero. Returns the largest scaled
    KKT residual seen during the final sweep.
    """
    resid = 0.0
    for _ in range(n_sweeps):
        resid = 0.0
        for e in range(len(w)):
            i, j = ei[e], ej[e]
            g = Sigma[i, i] + Sigma[j, j] - 2.0 * Sigma[i, j]
            tgt = target[e]
            t = 1.0 / tgt - 1.0 / g
            if nonneg and w[e] + t < 0.0:
                t = -w[e]
                r = max(0.0, g - tgt) if w[e] == 0.0 else abs(g - tgt)
            else:
                r = abs(g - tgt)
            r /= 1.0 + tgt
            if r > resid:
                resid = r
            if t == 0.0:
                continue
            v = Sigma[:, i] - Sigma[:, j]
            coef = t / (1.0 + t * g)
            Sigma -= coef * np.outer(v, v)
            w[e] += t
    return resid


def lasso_cd(Q, b, lam, center, beta, tol, max_iter):
    """Cyclic coordinate descent for
    ``0.5 b'Qb - b'beta + sum_k lam_k |beta_k - center_k|``.

    ``beta`` is updated in place. Stops once a full sweep moves no
    coordinate by more than ``tol``. Returns the number of sweeps.
    """
    p = len(beta)
    grad = Q @ beta
    for it in range(1, max_iter + 1):
        delta = 0.0
        for k in range(p):
            q = Q[k, k]
            if q <= 0.0:
                continue
            old = beta[k]
            z = (b[k] - grad[k] + q * old) / q - center[k]
            thr = lam[k] / q
            if z > thr:
                new = center[k] + z - thr
            elif z < -thr:
                new = center[k] + z + thr
            else:
                new = center[k]
            diff = new - old
            if diff != 0.0:
                grad += diff * Q[:, k]
                beta[k] = new
                if abs(diff) > delta:
                    delta = abs(diff)
        if delta <= tol:
            return it
    return max_iter
