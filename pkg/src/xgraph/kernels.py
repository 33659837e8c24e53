"""Kernel backend selection.

The compiled extension is used when importable; set ``XGRAPH_PURE_PYTHON=1``
to force the reference implementation.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("XGRAPH_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def laplacian_sweep(Sigma, w, ei, ej, target, nonneg=False, n_sweeps=1, backend=None):
    impl = _pick(backend)
    return impl.laplacian_sweep(Sigma, w, np.ascontiguousarray(ei, dtype=np.int64),
                                np.ascontiguousarray(ej, dtype=np.int64), _f64(target),
                                bool(nonneg), int(n_sweeps))


def lasso_cd(Q, b, lam, center, beta, tol=1e-10, max_iter=10_000, backend=None):
    impl = _pick(backend)
    return impl.lasso_cd(_f64(Q), _f64(b), _f64(lam), _f64(center), beta, float(tol), int(max_iter))


def _pick(backend):
    if backend is None:
        return _impl
    if backend == "python":
        return _kernels_py
    if backend == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {backend!r}")
