"""Edge-list files, run configuration, bundled datasets and result writers.

Edge-list format::

    # comment lines and blank lines are ignored
    16 undirected
    2 4
    2 5

The first non-comment line gives the node count and ``directed`` or
``undirected``; every further line is one dyad as 0-based indices.
"""
from __future__ import annotations

import csv
import hashlib
import json
import os
import shutil
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .graph import Graph


class GraphFormatError(ValueError):
    def __init__(self, path, line: int, msg: str):
        self.path, self.line = str(path), line
        super().__init__(f"{path}:{line}: {msg}")


def parse_edge_list(text: str, path="<string>") -> Graph:
    g = None
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if g is None:
            if len(parts) != 2 or parts[1].lower() not in ("directed", "undirected"):
                raise GraphFormatError(path, lineno, "header must be '<n> directed' or '<n> undirected'")
            try:
                n = int(parts[0])
            except ValueError:
                raise GraphFormatError(path, lineno, f"node count {parts[0]!r} is not an integer") from None
            if n < 1:
                raise GraphFormatError(path, lineno, "node count must be positive")
            g = Graph(n, parts[1].lower() == "directed")
            continue
        if len(parts) != 2:
            raise GraphFormatError(path, lineno, "expected two node indices")
        try:
            i, j = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(path, lineno, "node indices must be integers") from None
        if i == j:
            raise GraphFormatError(path, lineno, f"self-loop ({i}, {j})")
        if not (0 <= i < g.n and 0 <= j < g.n):
            raise GraphFormatError(path, lineno, f"index out of range for n={g.n}")
        key = (i, j) if g.directed else (min(i, j), max(i, j))
        if key in seen:
            raise GraphFormatError(path, lineno, f"duplicate edge ({i}, {j})")
        seen.add(key)
        g.toggle(i, j)
    if g is None:
        raise GraphFormatError(path, 0, "missing header line")
    return g


def load_graph(path) -> Graph:
    path = Path(path)
    return parse_edge_list(path.read_text(encoding="utf-8"), path)


def format_edge_list(g: Graph, comments=()) -> str:
    lines = [f"# {c}" for c in comments]
    lines.append(f"{g.n} {'directed' if g.directed else 'undirected'}")
    lines += [f"{i} {j}" for i, j in g.edges()]
    return "\n".join(lines) + "\n"


def save_graph(g: Graph, path, comments=()) -> None:
    Path(path).write_text(format_edge_list(g, comments), encoding="utf-8", newline="\n")


def adjacency_csv_to_graph(path, directed: bool | None = None) -> Graph:
    """Read a square 0/1 matrix from CSV (optional header row and label column)."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ValueError(f"{path}: empty adjacency file")

    def numeric(cells):
        try:
            return [float(c) for c in cells]
        except ValueError:
            return None

    if numeric(rows[0]) is None:
        rows = rows[1:]
    if rows and numeric(rows[0]) is None:
        rows = [r[1:] for r in rows]
    mat = []
    for k, r in enumerate(rows):
        vals = numeric(r)
        if vals is None:
            raise ValueError(f"{path}: non-numeric entry in matrix row {k + 1}")
        mat.append(vals)
    a = np.array(mat)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"{path}: adjacency matrix is not square")
    return Graph.from_adjacency(a, directed)


# bundled datasets ------------------------------------------------------------

def _data_dir():
    return resources.files("ergm_bayes") / "data"


def dataset_manifest() -> dict:
    return json.loads((_data_dir() / "manifest.json").read_text(encoding="utf-8"))


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _verify(name: str, entry: dict, data: bytes, source) -> Graph:
    if entry.get("sha256") and _sha256(data) != entry["sha256"]:
        raise ValueError(f"{source}: checksum mismatch for dataset {name!r}")
    g = parse_edge_list(data.decode("utf-8"), source)
    if g.n != entry["nodes"] or g.directed != entry["directed"]:
        kind = "directed" if entry["directed"] else "undirected"
        raise ValueError(f"{source}: dataset {name!r} should have {entry['nodes']} {kind} nodes")
    return g


def bundled_path(name: str) -> Path | None:
    entry = dataset_manifest()[name]
    p = _data_dir() / entry["file"]
    return Path(str(p)) if p.is_file() else None


DATA_ENV = "ERGM_BAYES_DATA"


def dataset_path(name: str) -> Path | None:
    """Bundled copy, else ``$ERGM_BAYES_DATA/<file>`` (a fetch-data target), else None."""
    p = bundled_path(name)
    if p is not None:
        return p
    extra = os.environ.get(DATA_ENV)
    if extra:
        q = Path(extra) / dataset_manifest()[name]["file"]
        if q.is_file():
            return q
    return None


def load_dataset(name: str) -> Graph:
    """Load a benchmark network by name; ``FileNotFoundError`` if unavailable."""
    manifest = dataset_manifest()
    if name not in manifest:
        raise KeyError(f"unknown dataset {name!r}; known: {', '.join(sorted(manifest))}")
    p = dataset_path(name)
    if p is None:
        raise FileNotFoundError(
            f"dataset {name!r} is not bundled; import it with fetch-data --source and set {DATA_ENV}")
    return _verify(name, manifest[name], p.read_bytes(), p)


def fetch_datasets(target, source=None) -> dict[str, str]:
    """Write the benchmark networks into ``target``.

    Bundled files are copied after checksum and node-count checks.  Networks
    that are not bundled are taken from ``source`` (a directory holding
    ``<file>`` in edge-list format) when given, after the node-count check.
    Returns a status per dataset: ``written``, ``present``, ``imported`` or
    ``missing``.
    """
    target = Path(target)
    target.mkdir(parents=True, exist_ok=True)
    status = {}
    for name, entry in dataset_manifest().items():
        dest = target / entry["file"]
        p = bundled_path(name)
        if p is not None:
            data = p.read_bytes()
            _verify(name, entry, data, p)
            if dest.is_file() and dest.read_bytes() == data:
                status[name] = "present"
            else:
                dest.write_bytes(data)
                status[name] = "written"
            continue
        if dest.is_file():
            _verify(name, entry, dest.read_bytes(), dest)
            status[name] = "present"
            continue
        src = Path(source) / entry["file"] if source is not None else None
        if src is not None and src.is_file():
            _verify(name, entry, src.read_bytes(), src)
            shutil.copyfile(src, dest)
            status[name] = "imported"
        else:
            status[name] = "missing"
    return status


def resolve_graph(ref: str) -> Graph:
    """A bundled dataset name or a path to an edge-list file."""
    if ref in dataset_manifest():
        return load_dataset(ref)
    return load_graph(ref)


# run configuration -----------------------------------------------------------

def _floats(text) -> list[float]:
    if isinstance(text, (list, tuple, np.ndarray)):
        return [float(v) for v in text]
    return [float(v) for v in str(text).replace(",", " ").split()]


@dataclass
class RunConfig:
    """Every knob a CLI run can take; unset algorithm parameters keep defaults."""

    dataset: str | None = None
    model: str | None = None
    algorithm: str | None = None
    seed: int | None = None
    out: str = "out"
    # prior N(prior_mean, prior_variance * I)
    prior_mean: list[float] | None = None
    prior_variance: float = 30.0
    # graph sampler
    proposal: str = "tnt"
    aux_iterations: int = 1000
    # exchange
    main_iterations: int = 30000
    proposal_sd: list[float] | None = None
    proposal_variance: list[float] | None = None
    init: list[float] | None = None
    burn_in: float = 0.1
    keep_aux_stats: bool = False
    # population
    chains: int | None = None
    gamma: float = 1.0
    epsilon_variance: float = 0.1
    iterations_per_chain: int = 6000
    warmup: int | None = None
    init_sd: float = 3.0
    # classical
    theta0: list[float] | None = None
    m: int = 1000
    # simulate
    theta: list[float] | None = None
    iterations: int = 10000
    record_every: int = 1
    # gof / summarize
    draws: str | None = None
    gof_count: int = 100
    max_lag: int = 500

    _lists = ("prior_mean", "proposal_sd", "proposal_variance", "init", "theta0", "theta")
    _ints = ("seed", "aux_iterations", "main_iterations", "chains", "iterations_per_chain",
             "warmup", "m", "iterations", "record_every", "gof_count", "max_lag")
    _floats_ = ("prior_variance", "burn_in", "gamma", "epsilon_variance", "init_sd")

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def update(self, values: dict) -> "RunConfig":
        known = set(self.keys())
        for key, val in values.items():
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            if val is None:
                continue
            setattr(self, key, self._coerce(key, val))
        return self

    def _coerce(self, key, val):
        if isinstance(val, str) and val.strip().lower() in ("none", ""):
            return None
        if key in self._lists:
            return _floats(val)
        if key in self._ints:
            return int(val)
        if key in self._floats_:
            return float(val)
        if key == "keep_aux_stats":
            if isinstance(val, str):
                return val.strip().lower() in ("1", "true", "yes", "on")
            return bool(val)
        return str(val).strip()

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        cfg = cls()
        cfg.update(parse_config_text(Path(path).read_text(encoding="utf-8"), path))
        return cfg

    def to_text(self) -> str:
        out = []
        for key in self.keys():
            val = getattr(self, key)
            if val is None:
                continue
            if isinstance(val, list):
                val = " ".join(repr(float(v)) for v in val)
            out.append(f"{key} = {val}")
        return "\n".join(out) + "\n"


def parse_config_text(text: str, path="<config>") -> dict:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key] = val
    return values


# writers ---------------------------------------------------------------------

def fmt(x) -> str:
    return "%.17g" % x


def _open_out(path):
    return open(path, "w", encoding="utf-8", newline="")


def write_draws(path, chains: list[np.ndarray], labels, start: int = 1) -> None:
    """``chain, iteration, theta...`` rows with 17 significant digits."""
    with _open_out(path) as fh:
        fh.write(",".join(["chain", "iteration", *labels]) + "\n")
        for c, draws in enumerate(chains, start=1):
            for t, row in enumerate(np.asarray(draws), start=start):
                fh.write(f"{c},{t}," + ",".join(fmt(v) for v in row) + "\n")


def read_draws(path) -> tuple[list[str], dict[int, np.ndarray]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["chain", "iteration"]:
            raise ValueError(f"{path}: not a draws file")
        rows: dict[int, list] = {}
        for r in reader:
            rows.setdefault(int(r[0]), []).append([float(v) for v in r[2:]])
    return header[2:], {c: np.array(v) for c, v in sorted(rows.items())}


def write_matrix(path, header, rows) -> None:
    with _open_out(path) as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in r) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_json(path, obj) -> None:
    with _open_out(path) as fh:
        json.dump(_jsonable(obj), fh, indent=2, allow_nan=False)
        fh.write("\n")
