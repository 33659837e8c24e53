# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops; see ``_kernels_py.py`` for the reference versions."""
from libc.math cimport fabs

import numpy as np


cdef double[::1] cython_view_alloc(Py_ssize_t n):
    return np.zeros(n, dtype=np.float64)


def laplacian_sweep(double[:, ::1] Sigma, double[::1] w, long[::1] ei, long[::1] ej,
                    double[::1] target, bint nonneg, int n_sweeps):
    cdef Py_ssize_t d = Sigma.shape[0]
    cdef Py_ssize_t m = w.shape[0]
    cdef Py_ssize_t e, a, c, i, j
    cdef int s
    cdef double g, tgt, t, r, coef, va, resid = 0.0
    cdef double[::1] v = cython_view_alloc(d)
    for s in range(n_sweeps):
        resid = 0.0
        for e in range(m):
            i = ei[e]
            j = ej[e]
            g = Sigma[i, i] + Sigma[j, j] - 2.0 * Sigma[i, j]
            tgt = target[e]
            t = 1.0 / tgt - 1.0 / g
            if nonneg and w[e] + t < 0.0:
                t = -w[e]
                if w[e] == 0.0:
                    r = g - tgt if g > tgt else 0.0
                else:
                    r = fabs(g - tgt)
            else:
                r = fabs(g - tgt)
            r /= 1.0 + tgt
            if r > resid:
                resid = r
            if t == 0.0:
                continue
            for a in range(d):
                v[a] = Sigma[a, i] - Sigma[a, j]
            coef = t / (1.0 + t * g)
            for a in range(d):
                va = coef * v[a]
                for c in range(d):
                    Sigma[a, c] -= va * v[c]
            w[e] += t
    return resid


def lasso_cd(double[:, ::1] Q, double[::1] b, double[::1] lam, double[::1] center,
             double[::1] beta, double tol, int max_iter):
    cdef Py_ssize_t p = beta.shape[0]
    cdef Py_ssize_t k, l
    cdef int it
    cdef double q, old, z, thr, new, diff, delta
    cdef double[::1] grad = cython_view_alloc(p)
    for k in range(p):
        for l in range(p):
            grad[k] += Q[k, l] * beta[l]
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
                for l in range(p):
                    grad[l] += diff * Q[l, k]
                beta[k] = new
                if fabs(diff) > delta:
                    delta = fabs(diff)
        if delta <= tol:
            return it
    return max_iter
