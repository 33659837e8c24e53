"""File formats: observation CSVs, matrix CSVs, partial matrices and model specs.

Node indices in files are 1-based; the library API is 0-based.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ConfigError, DataError, XGraphError
from .graphs import Dag, UndirectedGraph, read_edge_list
from .simulation import RecursiveMLSpec

log = logging.getLogger(__name__)

NA_TOKEN = "NA"


@dataclass(frozen=True)
class DataTable:
    values: np.ndarray
    columns: list[str]
    dropped: int = 0
    dates: pd.Series | None = None


def read_data(path, date_column: str | None = None) -> DataTable:
    """Read an observation CSV with a header row.

    Rows with any missing field are dropped (the count is logged). All
    columns other than ``date_column`` must be numeric.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as exc:
        raise DataError(f"cannot parse {path}: {exc}") from exc
    n0 = len(df)
    df = df.dropna(how="any")
    dropped = n0 - len(df)
    if dropped:
        log.warning("dropped %d of %d rows with missing values from %s", dropped, n0, path)
    dates = None
    if date_column is not None:
        if date_column not in df.columns:
            raise DataError(f"date column {date_column!r} not found in {path}")
        dates = pd.to_datetime(df.pop(date_column), errors="coerce")
        if dates.isna().any():
            raise DataError(f"unparseable dates in column {date_column!r}")
        dates = dates.reset_index(drop=True)
    try:
        values = df.to_numpy(dtype=float)
    except ValueError as exc:
        raise DataError(f"non-numeric data in {path}: {exc}") from exc
    if values.ndim != 2 or values.shape[1] < 1 or values.shape[0] < 2:
        raise DataError(f"{path} holds too little data ({values.shape})")
    return DataTable(values, [str(c) for c in df.columns], dropped, dates)


def write_data(path, X, columns=None) -> None:
    X = np.asarray(X, dtype=float)
    cols = columns or [f"X{i + 1}" for i in range(X.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for row in X:
            w.writerow([repr(float(v)) for v in row])


def read_matrix(path, allow_na: bool = False) -> np.ndarray:
    """Read a square headerless CSV matrix; ``NA`` entries become NaN if allowed."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"matrix file not found: {path}")
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or all(not c.strip() for c in rec):
                continue
            row = []
            for c in rec:
                c = c.strip()
                if c == NA_TOKEN:
                    if not allow_na:
                        raise DataError(f"unexpected {NA_TOKEN} entry in {path}")
                    row.append(np.nan)
                    continue
                try:
                    row.append(float(c))
                except ValueError as exc:
                    raise DataError(f"bad matrix entry {c!r} in {path}") from exc
            rows.append(row)
    d = len(rows)
    if d == 0 or any(len(r) != d for r in rows):
        raise DataError(f"{path} is not a square matrix")
    return np.array(rows)


def write_matrix(path, M) -> None:
    M = np.asarray(M, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([NA_TOKEN if np.isnan(v) else repr(float(v)) for v in row])


def read_graph(path, num_nodes: int | None = None) -> UndirectedGraph:
    G = read_edge_list(Path(path).read_text(), num_nodes=num_nodes)
    if not isinstance(G, UndirectedGraph):
        raise DataError(f"{path} holds a directed graph; an undirected one is needed")
    return G


# ---------------------------------------------------------------- model specs

def _matrix(obj, name) -> np.ndarray:
    try:
        M = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a numeric matrix") from exc
    if M.ndim != 2:
        raise ConfigError(f"{name} must be a matrix")
    return M


def parse_model_spec(spec: dict) -> dict:
    """Validate a simulation model document.

    ``{"kind": "hr", "gamma": [[...]]}``, ``{"kind": "maxlinear", "A": [[...]]}``
    or ``{"kind": "recml", "dag": {"nodes": d, "arcs": [[k, i], ...]},
    "weights": {"arcs": [...], "nodes": [...]}}`` plus ``"n"`` and
    ``"seed"``. Arcs are 1-based.
    """
    if not isinstance(spec, dict):
        raise ConfigError("model spec must be a JSON object")
    kind = spec.get("kind")
    out = {"kind": kind}
    if kind == "hr":
        out["gamma"] = _matrix(spec.get("gamma"), "gamma")
    elif kind == "maxlinear":
        out["A"] = _matrix(spec.get("A"), "A")
    elif kind == "recml":
        dag = spec.get("dag")
        wts = spec.get("weights")
        if not isinstance(dag, dict) or not isinstance(wts, dict):
            raise ConfigError("recml spec needs 'dag' and 'weights' objects")
        try:
            arcs = [(int(k) - 1, int(i) - 1) for k, i in dag.get("arcs", [])]
            D = Dag(int(dag["nodes"]), frozenset(arcs))
            aw = dict(zip(arcs, [float(v) for v in wts.get("arcs", [])]))
            if len(aw) != len(arcs) or len(wts.get("arcs", [])) != len(arcs):
                raise ConfigError("one weight per arc is required")
            out["spec"] = RecursiveMLSpec(D, aw, np.array(wts.get("nodes"), dtype=float))
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError, XGraphError) as exc:
            raise ConfigError(f"invalid recml spec: {exc}") from exc
        out["normalize"] = bool(spec.get("normalize", False))
    else:
        raise ConfigError(f"unknown model kind {kind!r}")
    for key in ("n", "seed"):
        if key in spec:
            try:
                out[key] = int(spec[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key} must be an integer") from exc
    return out


def read_json(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
