"""Compare the compiled kernels with the pure-Python reference.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is timed on the
same inputs under both backends and the outputs are checked to agree.
"""
import argparse
import timeit

import numpy as np

from xgraph import kernels
from xgraph.completion import laplacian, laplacian_pinv


def sweep_inputs(d, seed=0):
    rng = np.random.default_rng(seed)
    ei, ej = np.triu_indices(d, 1)
    keep = rng.random(ei.size) < min(1.0, 4.0 / d)
    keep[: d - 1] = False
    ei = np.concatenate([np.arange(d - 1), ei[keep]]).astype(np.int64)
    ej = np.concatenate([np.arange(1, d), ej[keep]]).astype(np.int64)
    w = rng.uniform(0.5, 2.0, ei.size)
    S = laplacian_pinv(laplacian(d, ei, ej, w))
    return S, w, ei, ej, rng.uniform(0.5, 2.0, ei.size)


def lasso_inputs(p, seed=0):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(p, p))
    return A @ A.T / p + np.eye(p), rng.normal(size=p), np.full(p, 0.1), np.zeros(p)


def bench(backend, d, p, repeat):
    S0, w0, ei, ej, t = sweep_inputs(d)
    Q, b, lam, c = lasso_inputs(p)

    # the kernels work in place, so each call starts from fresh copies
    def sweep():
        w = w0.copy()
        kernels.laplacian_sweep(S0.copy(), w, ei, ej, t, True, 5, backend=backend)
        return w

    def lasso():
        beta = np.zeros(p)
        kernels.lasso_cd(Q, b, lam, c, beta, backend=backend)
        return beta

    out = {}
    for name, fn in [("laplacian_sweep", sweep), ("lasso_cd", lasso)]:
        result = fn()
        out[name] = (min(timeit.repeat(fn, number=1, repeat=repeat)), result)
    return out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dim", type=int, default=40, help="nodes in the sweep problem")
    parser.add_argument("--lasso-dim", type=int, default=60, help="coefficients in the lasso problem")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if kernels.BACKEND != "cython":
        raise SystemExit("compiled extension not available; build with pip install -e .")
    py = bench("python", args.dim, args.lasso_dim, args.repeat)
    cy = bench("cython", args.dim, args.lasso_dim, args.repeat)
    print(f"{'kernel':<18}{'python (s)':>12}{'cython (s)':>12}{'speedup':>10}  max |diff|")
    for name in py:
        tp, rp = py[name]
        tc, rc = cy[name]
        print(f"{name:<18}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x  {np.abs(rp - rc).max():.2e}")


if __name__ == "__main__":
    main()
