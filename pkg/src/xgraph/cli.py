"""Batch command-line interface.

``xgraph <estimate|learn|fit|evaluate|simulate> --config run.json`` with
flag overrides ``--p``, ``--seed``, ``--method``, ``--grid`` and ``--output``.
Relative paths in the config are resolved against the config file's
directory. Exit codes: 0 success, 2 configuration error, 3 data error,
4 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import platform
import sys
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import scipy

from . import __version__, kernels
from .completion import PartialVariogram, complete_gamma
from .errors import ConfigError, ConvergenceError, DataError, XGraphError
from .estimators import EstimatorConfig, emp_chi, emp_vario_joint, evaluate_loglik
from .graphs import UndirectedGraph, format_edge_list
from .hr import FittedModel, hr_chi, is_valid_variogram, validate_variogram, variogram_spectrum
from .io import parse_model_spec, read_data, read_graph, read_json, read_matrix, write_data, write_matrix
from .simulation import sample_hr_pareto, sample_max_linear, sample_recursive_max_linear
from .structure import default_grid, eglearn_path, emst, emtp2_fit, parameter_shift_fit

log = logging.getLogger("xgraph")

COMMANDS = ("estimate", "learn", "fit", "evaluate", "simulate")
METHODS = ("emst", "eglearn", "emtp2", "shift")
EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_CONVERGENCE = 0, 2, 3, 4
LOCK_NAME = ".xgraph.lock"


@dataclass
class RunConfig:
    command: str
    base: Path
    output: Path
    p: float = 0.95
    seed: int | None = None
    method: str | None = None
    grid: list[float] | None = None
    raw: dict = field(default_factory=dict)

    def path(self, key: str, required: bool = True) -> Path | None:
        val = self.raw.get(key)
        if val is None:
            if required:
                raise ConfigError(f"config key {key!r} is required for {self.command}")
            return None
        p = Path(val)
        return p if p.is_absolute() else self.base / p

    @property
    def estimator(self) -> EstimatorConfig:
        return EstimatorConfig(self.p)

    def echo(self) -> dict:
        out = dict(self.raw)
        out.update(command=self.command, p=self.p, seed=self.seed, method=self.method, grid=self.grid,
                   output=str(self.output))
        return out


def _parse_grid(val) -> list[float] | None:
    if val is None:
        return None
    if isinstance(val, str):
        val = [v for v in val.replace(";", ",").split(",") if v.strip()]
    try:
        grid = [float(v) for v in val]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid penalty grid {val!r}") from exc
    if not grid or any(not np.isfinite(g) or g < 0 for g in grid):
        raise ConfigError("penalty grid must be a nonempty list of nonnegative numbers")
    return grid


def build_config(args: argparse.Namespace) -> RunConfig:
    raw: dict = {}
    base = Path.cwd()
    if args.config:
        cfg_path = Path(args.config)
        raw = read_json(cfg_path)
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        base = cfg_path.resolve().parent
    p = args.p if args.p is not None else raw.get("p", 0.95)
    try:
        p = float(p)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"p must be a number, got {p!r}") from exc
    if not 0 < p < 1:
        raise ConfigError(f"threshold probability p must lie in (0, 1), got {p}")
    seed = args.seed if args.seed is not None else raw.get("seed")
    if seed is not None:
        try:
            seed = int(seed)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"seed must be an integer, got {seed!r}") from exc
    method = args.method or raw.get("method")
    grid = _parse_grid(args.grid if args.grid is not None else raw.get("grid"))
    out = args.output or raw.get("output") or "."
    out = Path(out)
    if not out.is_absolute():
        out = (Path.cwd() if args.output else base) / out
    cfg = RunConfig(args.command, base, out, p, seed, method, grid, raw)
    if cfg.command == "learn":
        if method not in METHODS:
            raise ConfigError(f"method must be one of {', '.join(METHODS)}, got {method!r}")
        if method == "shift" and not grid:
            raise ConfigError("method 'shift' needs a penalty grid")
    return cfg


# ---------------------------------------------------------------- outputs

@contextmanager
def output_lock(directory: Path):
    directory.mkdir(parents=True, exist_ok=True)
    lock = directory / LOCK_NAME
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError as exc:
        raise ConfigError(f"output directory {directory} is locked by another run ({lock})") from exc
    try:
        os.write(fd, str(os.getpid()).encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class Writer:
    """Writes outputs and a ``<name>.meta.json`` sidecar next to each."""

    def __init__(self, cfg: RunConfig, extra: dict | None = None):
        self.cfg = cfg
        self.extra = extra or {}
        self.files: list[Path] = []

    def _meta(self, path: Path, info: dict | None):
        meta = {
            "command": self.cfg.command,
            "config": self.cfg.echo(),
            "seed": self.cfg.seed,
            "versions": {
                "xgraph": __version__,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "pandas": pd.__version__,
            },
            "kernel_backend": kernels.BACKEND,
            "sha256": _sha256(path),
        }
        meta.update(self.extra)
        if info:
            meta.update(info)
        side = path.with_name(path.name + ".meta.json")
        side.write_text(json.dumps(meta, indent=2, sort_keys=True, default=_json_default) + "\n")

    def emit(self, name: str, write, info: dict | None = None) -> Path:
        path = self.cfg.output / name
        write(path)
        self._meta(path, info)
        self.files.append(path)
        log.info("wrote %s", path)
        return path

    def matrix(self, name, M, info=None):
        return self.emit(name, lambda p: write_matrix(p, M), info)

    def text(self, name, text, info=None):
        return self.emit(name, lambda p: p.write_text(text), info)

    def table(self, name, df: pd.DataFrame, info=None):
        return self.emit(name, lambda p: df.to_csv(p, index=False, lineterminator="\n", float_format="%.17g"), info)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


# ---------------------------------------------------------------- data selection

def _select_rows(cfg: RunConfig, part: str, key: str = "data") -> np.ndarray:
    """Rows of the data file belonging to ``part`` ("train" or "test").

    ``split`` is either ``{"train_rows": [a, b], "test_rows": [c, d]}``
    (1-based inclusive data-row ranges) or ``{"date_column": name,
    "train_end": date}`` (train: dates up to and including ``train_end``,
    test: later dates). Without ``split`` every row is used.
    """
    split = cfg.raw.get("split")
    date_col = split.get("date_column") if isinstance(split, dict) else None
    table = read_data(cfg.path(key), date_column=date_col)
    X = table.values
    if split is None:
        return X
    if not isinstance(split, dict):
        raise ConfigError("split must be a JSON object")
    if date_col is not None:
        if "train_end" not in split:
            raise ConfigError("date split needs 'train_end'")
        try:
            end = pd.Timestamp(split["train_end"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid train_end {split['train_end']!r}") from exc
        mask = (table.dates <= end).to_numpy()
        rows = X[mask] if part == "train" else X[~mask]
    else:
        rng = split.get(f"{part}_rows")
        if rng is None:
            return X
        try:
            a, b = (int(v) for v in rng)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{part}_rows must be [first, last]") from exc
        if not 1 <= a <= b <= X.shape[0]:
            raise ConfigError(f"{part}_rows {rng} out of range 1..{X.shape[0]}")
        rows = X[a - 1:b]
    if rows.shape[0] < 2:
        raise DataError(f"{part} split has {rows.shape[0]} rows")
    return rows


def _gamma_hat(cfg: RunConfig) -> np.ndarray:
    """Precomputed ``gamma_hat`` matrix or the joint estimate from training data."""
    path = cfg.path("gamma_hat", required=False)
    if path is not None:
        return read_matrix(path)
    return emp_vario_joint(_select_rows(cfg, "train"), cfg.estimator)


# ---------------------------------------------------------------- commands

def cmd_estimate(cfg: RunConfig, out: Writer) -> None:
    X = _select_rows(cfg, "train")
    est = cfg.estimator
    G = emp_vario_joint(X, est)
    chi = emp_chi(X, est)
    k = est.k(X.shape[0])
    out.matrix("gamma_hat.csv", G, {"n": X.shape[0], "k": k})
    out.matrix("chi_hat.csv", chi, {"n": X.shape[0], "k": k})
    lines = [f"n = {X.shape[0]}", f"d = {X.shape[1]}", f"p = {cfg.p}", f"k = {k}"]
    valid = is_valid_variogram(G)
    lines.append(f"valid variogram: {'yes' if valid else 'no'}")
    ev = variogram_spectrum(G)
    lines.append(f"eigenvalues of P(-G/2)P: min {ev[-1]:.6g}, second smallest {ev[-2]:.6g}, max {ev[0]:.6g}")
    if not valid:
        lines.append("the estimate cannot be used as a model parameter without regularization")
    out.text("validity.txt", "\n".join(lines) + "\n", {"valid": valid})


def cmd_learn(cfg: RunConfig, out: Writer) -> None:
    est = cfg.estimator
    method = cfg.method
    if method == "emst":
        kind = cfg.raw.get("weights", "variogram")
        res = emst(_select_rows(cfg, "train"), est, weight_kind=kind)
        out.text("graph.edges", format_edge_list(res.graph), {"method": method, "weights": kind,
                                                               "n_edges": res.graph.n_edges})
        _summary(out, [(None, res.graph)])
    elif method == "eglearn":
        X = _select_rows(cfg, "train")
        grid = cfg.grid or list(default_grid(X, est))
        results = eglearn_path(X, est, grid)
        rows = []
        for idx, r in enumerate(results, 1):
            info = {"method": method, "penalty": r.penalty, "n_edges": r.graph.n_edges, "connected": r.connected}
            out.text(f"graph_{idx:03d}.edges", format_edge_list(r.graph), info)
            out.table(f"votes_{idx:03d}.csv", _votes_table(r.scores), info)
            rows.append((r.penalty, r.graph))
        _summary(out, rows)
    elif method == "emtp2":
        fit = emtp2_fit(_gamma_hat(cfg))
        info = {"method": method, **fit.info, "n_edges": fit.graph.n_edges}
        out.text("graph.edges", format_edge_list(fit.graph), info)
        out.matrix("gamma_plus.csv", fit.Gamma, info)
        out.matrix("theta_plus.csv", fit.Theta, info)
        _summary(out, [(None, fit.graph)])
    elif method == "shift":
        G = _gamma_hat(cfg)
        c = cfg.raw.get("shift_c")
        rows = []
        for idx, lam in enumerate(cfg.grid, 1):
            r = parameter_shift_fit(G, lam, c)
            info = {"method": method, "penalty": lam, "n_edges": r.graph.n_edges, "connected": r.connected,
                    "valid_precision": r.valid, "c": r.info["c"]}
            out.text(f"graph_{idx:03d}.edges", format_edge_list(r.graph), info)
            out.matrix(f"theta_{idx:03d}.csv", r.Theta, info)
            rows.append((lam, r.graph))
        _summary(out, rows)


def _votes_table(votes: np.ndarray) -> pd.DataFrame:
    d = votes.shape[0]
    i, j = np.triu_indices(d, 1)
    return pd.DataFrame({"i": i + 1, "j": j + 1, "votes": votes[i, j]})


def _summary(out: Writer, rows) -> None:
    df = pd.DataFrame({
        "index": np.arange(1, len(rows) + 1),
        "penalty": [np.nan if pen is None else pen for pen, _ in rows],
        "n_edges": [g.n_edges for _, g in rows],
        "connected": [g.is_connected() for _, g in rows],
    })
    out.table("summary.csv", df)


def cmd_fit(cfg: RunConfig, out: Writer) -> None:
    partial = cfg.path("partial", required=False)
    if partial is not None:
        values = read_matrix(partial, allow_na=True)
    else:
        values = _gamma_hat(cfg)
    G = read_graph(cfg.path("graph"), num_nodes=values.shape[0])
    if G.num_nodes != values.shape[0]:
        raise DataError(f"graph has {G.num_nodes} nodes, matrix has dimension {values.shape[0]}")
    if not G.is_connected():
        raise DataError("the graph of a Husler-Reiss graphical model must be connected")
    model = complete_gamma(PartialVariogram(G, values), method=cfg.raw.get("completion", "auto"))
    info = {"method": model.method, "n_edges": G.n_edges, **model.info}
    out.text("graph.edges", format_edge_list(G), info)
    out.matrix("gamma.csv", model.Gamma, info)
    out.matrix("theta.csv", model.Theta, info)
    out.matrix("chi.csv", model.chi(), info)


def _load_model(cfg: RunConfig, spec: dict) -> tuple[str, FittedModel]:
    if not isinstance(spec, dict) or "gamma" not in spec:
        raise ConfigError("each model needs at least a 'gamma' matrix path")
    name = str(spec.get("name", Path(spec["gamma"]).stem))

    def resolve(v):
        p = Path(v)
        return p if p.is_absolute() else cfg.base / p

    Gamma = validate_variogram(read_matrix(resolve(spec["gamma"])))
    d = Gamma.shape[0]
    graph = read_graph(resolve(spec["graph"]), num_nodes=d) if "graph" in spec else UndirectedGraph.complete(d)
    return name, FittedModel.from_gamma(graph, Gamma, p=cfg.p, method=name)


def cmd_evaluate(cfg: RunConfig, out: Writer) -> None:
    models = cfg.raw.get("models")
    if not isinstance(models, list) or not models:
        raise ConfigError("evaluate needs a nonempty 'models' list")
    key = "test_data" if "test_data" in cfg.raw else "data"
    Xtest = _select_rows(cfg, "test", key=key)
    est = cfg.estimator
    loaded = [_load_model(cfg, m) for m in models]
    rows, scatter = [], []
    chi_emp = emp_chi(Xtest, est)
    for name, model in loaded:
        if model.dim != Xtest.shape[1]:
            raise DataError(f"model {name!r} has dimension {model.dim}, test data has {Xtest.shape[1]}")
        ev = evaluate_loglik(model, Xtest, est)
        rows.append({"method": name, "n_edges": model.graph.n_edges, "score": ev.score,
                     "raw_loglik": ev.raw_loglik, "saturated_available": ev.saturated_available})
        chi_fit = hr_chi(model.Gamma)
        i, j = np.triu_indices(model.dim, 1)
        scatter.append(pd.DataFrame({"method": name, "i": i + 1, "j": j + 1,
                                     "chi_fitted": chi_fit[i, j], "chi_empirical": chi_emp[i, j]}))
    out.table("evaluation.csv", pd.DataFrame(rows), {"n_test": Xtest.shape[0]})
    out.table("chi_scatter.csv", pd.concat(scatter, ignore_index=True))


def _model_hash(doc: dict) -> str:
    return hashlib.sha256(json.dumps(doc, sort_keys=True, default=_json_default).encode()).hexdigest()


def cmd_simulate(cfg: RunConfig, out: Writer) -> None:
    doc = cfg.raw.get("model")
    if isinstance(doc, str):
        doc = read_json(cfg.path("model"))
    if not isinstance(doc, dict):
        raise ConfigError("simulate needs a 'model' object or path to a model JSON file")
    spec = parse_model_spec(doc)
    n = cfg.raw.get("n", spec.get("n"))
    seed = cfg.seed if cfg.seed is not None else spec.get("seed")
    try:
        n = int(n)
    except (TypeError, ValueError) as exc:
        raise ConfigError("simulate needs a sample size 'n'") from exc
    if n < 1:
        raise ConfigError("sample size must be positive")
    if seed is None:
        raise ConfigError("simulate needs an explicit seed")
    cfg.seed = int(seed)
    kind = spec["kind"]
    if kind == "hr":
        X = sample_hr_pareto(spec["gamma"], n, cfg.seed)
    elif kind == "maxlinear":
        X = sample_max_linear(spec["A"], n, cfg.seed)
    else:
        rec = spec["spec"].normalized() if spec["normalize"] else spec["spec"]
        X = sample_recursive_max_linear(rec, n, cfg.seed)
    out.emit("samples.csv", lambda p: write_data(p, X),
             {"model_hash": _model_hash(doc), "kind": kind, "n": n})


HANDLERS = {
    "estimate": cmd_estimate,
    "learn": cmd_learn,
    "fit": cmd_fit,
    "evaluate": cmd_evaluate,
    "simulate": cmd_simulate,
}


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xgraph", description="Graphical models for multivariate extremes.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON run configuration")
    ap.add_argument("--p", type=float, help="threshold probability (overrides config)")
    ap.add_argument("--seed", type=int, help="random seed (overrides config)")
    ap.add_argument("--method", choices=METHODS, help="structure learning method (overrides config)")
    ap.add_argument("--grid", help="comma-separated penalty grid (overrides config)")
    ap.add_argument("--output", help="output directory (overrides config)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        with output_lock(cfg.output):
            HANDLERS[cfg.command](cfg, Writer(cfg))
    except ConfigError as exc:
        print(f"xgraph: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"xgraph: did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DataError, XGraphError) as exc:
        print(f"xgraph: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
